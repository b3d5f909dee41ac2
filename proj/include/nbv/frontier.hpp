#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "nbv/types.hpp"
#include "nbv/voxel_map.hpp"

namespace nbv {

// A surface frontier: an empty voxel bordering both unknown and occupied
// space. The normal points away from the occupied side; it is absent when the
// weighted neighbor sum degenerates.
struct Frontier {
  VoxelKey key;
  std::optional<Vec3> normal;
};

struct FrontierSet {
  std::map<VoxelKey, Frontier> frontiers;  // reachable frontiers, key-ordered
  std::set<VoxelKey> c_rem;                // frontiers with no admissible view

  bool reachable_empty() const { return frontiers.empty(); }
};

// Definition test: empty voxel, in bounds, with an unknown 6-neighbor and an
// occupied 18-neighbor.
bool is_frontier_voxel(const VoxelMap& map, const VoxelKey& k);

// Uncertainty-weighted normal over the 26-neighborhood: each neighbor pulls
// along its unit offset with weight +w (empty/unknown) or -w (occupied).
// Absent when the unnormalized sum is shorter than 1e-9.
std::optional<Vec3> surface_normal(const VoxelMap& map, const VoxelKey& k);

// Full scan over the allocated map. Keeps the unreachable marks of `previous`
// for voxels that still qualify.
FrontierSet extract_frontiers(const VoxelMap& map, const FrontierSet* previous = nullptr);

// Incremental update after a scan: re-tests only voxels whose 18-neighborhood
// saw a classification change, and clears unreachable marks whose
// neighborhood was re-observed (using the map's per-voxel scan stamps).
void update_frontiers(FrontierSet& set, const VoxelMap& map,
                      const std::vector<VoxelKey>& class_changed);

// Moves a frontier to the unreachable set. Returns false (and warns) if the
// key is not a current frontier; marking an already-unreachable key is a
// silent no-op returning true.
bool mark_unreachable(FrontierSet& set, const VoxelKey& key);

// ix,iy,iz,nx,ny,nz,reachable per line.
void write_frontiers_csv(const FrontierSet& set, std::ostream& out);

}  // namespace nbv
