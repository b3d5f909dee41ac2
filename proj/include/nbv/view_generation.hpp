#pragma once

#include <map>
#include <vector>

#include "nbv/frontier.hpp"
#include "nbv/quality.hpp"
#include "nbv/types.hpp"
#include "nbv/voxel_map.hpp"

namespace nbv {

enum class Band : uint8_t { Optimal, Close, Long };

const char* band_name(Band b);

struct ViewCandidate {
  Vec3 position = Vec3::Zero();
  Vec3 view_dir = Vec3::UnitX();  // unit vector toward the generating frontier
  VoxelKey frontier_key;
  Band band = Band::Optimal;

  double yaw() const { return std::atan2(view_dir.y(), view_dir.x()); }
};

struct GenerationConfig {
  double robot_radius = 1.0;
  double horizontal_step = deg_to_rad(30.0);
  int max_horizontal_rotations = 11;  // 0, +/-30 ... +/-150 degrees
  double vert_min = deg_to_rad(-35.0);
  double vert_max = deg_to_rad(30.0);
};

// Representative sample distance per band, ordered close < optimal < long.
struct GenerationSchedule {
  double close = 0.0;
  double optimal = 0.0;
  double long_range = 0.0;

  static GenerationSchedule from(const QualityConfig& q);
  double distance(Band b) const;
};

// Vertical correction followed by the alternating horizontal sweep: the
// sampling direction's elevation is clamped so the frontier stays inside the
// vertical FoV when looked at from the sampled position, then attempt k turns
// the corrected direction about the vertical axis by +/- ceil(k/2) steps.
// Distance to the frontier is preserved by construction (unit output).
Vec3 rotation_fallback(const Vec3& normal, int attempt, const GenerationConfig& cfg);

// One candidate per reachable frontier with a defined normal, produced by
// trying bands in order Optimal, Close, Long and the full rotation schedule
// within each band. Frontiers whose whole schedule fails move to the
// unreachable set. Deterministic: frontiers processed in key order.
// `cache` (optional) carries still-valid candidates across planning rounds.
std::vector<ViewCandidate> generate_views(const VoxelMap& map, FrontierSet& frontiers,
                                          const QualityConfig& q, const GenerationConfig& cfg,
                                          std::map<VoxelKey, ViewCandidate>* cache = nullptr);

}  // namespace nbv
