#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nbv/types.hpp"
#include "nbv/voxel_map.hpp"

namespace nbv {

struct Triangle {
  Vec3 a;
  Vec3 b;
  Vec3 c;
};

// Dense occupancy grid of the true environment. Drives the simulated sensor
// and the metrics. Voxel (0,0,0) has its min corner at `origin`.
class GroundTruthScene {
 public:
  GroundTruthScene(const Eigen::Vector3i& dims, double voxel_size, const Vec3& origin);

  const Eigen::Vector3i& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  const Vec3& origin() const { return origin_; }
  Aabb grid_box() const;

  bool in_grid(const VoxelKey& k) const {
    return k.x >= 0 && k.x < dims_.x() && k.y >= 0 && k.y < dims_.y() && k.z >= 0 &&
           k.z < dims_.z();
  }
  bool occupied(const VoxelKey& k) const { return in_grid(k) && occ_[flat_index(k)] != 0; }
  void set_occupied(const VoxelKey& k, bool value);

  VoxelKey key_of(const Vec3& p) const { return world_to_key(p, voxel_size_, origin_); }
  Vec3 center_of(const VoxelKey& k) const { return key_center(k, voxel_size_, origin_); }

  // Occupied voxels with at least one non-occupied 6-neighbor. Call
  // rebuild_surface() after editing occupancy.
  const std::vector<VoxelKey>& surface_keys() const { return surface_; }
  void rebuild_surface();

  // Exact Euclidean distance from the voxel center to the nearest occupied
  // voxel center, truncated at tau. Zero for occupied voxels.
  double truncated_distance(const VoxelKey& k, double tau) const;

  // True iff no occupied voxel center lies within `radius` of `p`.
  bool clearance_in_gt(const Vec3& p, double radius) const;

  const Aabb& exploration_bounds() const { return bounds_; }
  void set_exploration_bounds(const Aabb& b) { bounds_ = b; }
  const Vec3& suggested_start() const { return start_; }
  void set_suggested_start(const Vec3& s) { start_ = s; }

  // Bit-exact binary grid: header (magic "VOXG", u32 version, u32 dims[3],
  // f32 voxel size, f32 origin[3]) then row-major x-fastest bit-packed
  // occupancy, LSB first, little-endian.
  void save_voxgrid(std::ostream& out) const;
  void save_voxgrid(const std::string& path) const;
  static GroundTruthScene load_voxgrid(std::istream& in);
  static GroundTruthScene load_voxgrid(const std::string& path);

  // Conservative voxelization: a voxel is occupied iff a triangle overlaps it
  // with positive area (touching a max face only does not count, so flat
  // geometry on a grid plane lands in exactly one layer).
  static GroundTruthScene voxelize(const std::vector<Triangle>& tris, double voxel_size,
                                   const Vec3& origin, const Eigen::Vector3i& dims);

  // Wavefront OBJ, vertices and triangulated faces only. The grid is sized to
  // the mesh bounds padded by one voxel.
  static GroundTruthScene load_mesh_obj(std::istream& in, double voxel_size);
  static GroundTruthScene load_mesh_obj(const std::string& path, double voxel_size);

 private:
  size_t flat_index(const VoxelKey& k) const {
    return size_t(k.x) + size_t(dims_.x()) * (size_t(k.y) + size_t(dims_.y()) * size_t(k.z));
  }

  Eigen::Vector3i dims_;
  double voxel_size_;
  Vec3 origin_;
  std::vector<uint8_t> occ_;
  std::vector<VoxelKey> surface_;
  Aabb bounds_;
  Vec3 start_ = Vec3::Zero();
};

// Area of the triangle clipped to the box, for the voxelizer and its tests.
double triangle_box_overlap_area(const Triangle& t, const Vec3& box_min, const Vec3& box_max);

struct RoomParams {
  double width_m = 10.0;
  double length_m = 10.0;
  double height_m = 3.0;
  double voxel_size = 0.25;
};

struct CorridorTParams {
  double width_m = 2.0;        // corridor width
  double height_m = 2.5;
  double stem_length_m = 12.0; // entry branch, along +x
  double arm_length_m = 8.0;   // each side branch of the T, along +/-y
  double voxel_size = 0.25;
};

struct ScatteredParams {
  int box_count = 3;
  double extent_m = 20.0;      // square ground extent
  double height_m = 8.0;       // open-sky exploration ceiling
  double voxel_size = 0.25;
  uint64_t layout_seed = 1;    // deterministic placement
};

// Hollow closed box, one-voxel walls; bounds cover the interior.
GroundTruthScene make_room_scene(const RoomParams& p);
// Closed T-shaped corridor, three connected branches.
GroundTruthScene make_corridor_t_scene(const CorridorTParams& p);
// Ground slab with disjoint boxes under an open sky.
GroundTruthScene make_scattered_scene(const ScatteredParams& p);

struct MetricsReport {
  int64_t covered_count = 0;
  double coverage_ratio = 0.0;
  double path_length_m = 0.0;
  double mean_map_error_pct = 0.0;
  double z_post = 0.0;
  std::map<int, double> shortfall_pct;  // probe distance (m) -> % deficit
  double wall_time_s = 0.0;
};

// A ground-truth surface voxel counts as covered when the reconstructed voxel
// is observed and its distance agrees within one voxel diagonal.
std::pair<int64_t, double> coverage(const VoxelMap& map, const GroundTruthScene& gt);

// Mean distance error over ground-truth surface voxels as a percentage of the
// truncation distance; unobserved voxels contribute the full truncation.
double map_error_pct(const VoxelMap& map, const GroundTruthScene& gt);

// Deficit mass against the per-voxel confidence 1/d^2 implied by observing at
// `probe_distance`, as a percentage, over ground-truth surface voxels.
double quality_shortfall_pct(const VoxelMap& map, const GroundTruthScene& gt,
                             double probe_distance);

}  // namespace nbv
