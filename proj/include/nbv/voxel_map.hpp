#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <unordered_map>
#include <vector>

#include "nbv/raycast.hpp"
#include "nbv/types.hpp"

namespace nbv {

enum class VoxelState : uint8_t { Empty, Occupied, Unknown };

// Aggregated projective distance to the closest surface plus a confidence
// weight. A voxel with zero weight has never been observed.
struct TsdfVoxel {
  double distance = 0.0;
  double weight = 0.0;
  uint32_t last_scan = 0;  // id of the last scan that touched this voxel
};

struct MapConfig {
  double voxel_size = 0.25;
  double truncation = 1.0;  // distance clamp, >= 2 * voxel_size
  Vec3 origin = Vec3::Zero();
  Aabb bounds;              // exploration box; snapped to whole voxels
  double min_obs_range = 0.42;
  double max_obs_range = 10.0;
};

// Sparse TSDF grid stored as 8^3 voxel blocks allocated on first touch.
// Integration is single-writer; all query methods are pure reads.
class VoxelMap {
 public:
  explicit VoxelMap(const MapConfig& cfg);

  const MapConfig& config() const { return cfg_; }
  double voxel_size() const { return cfg_.voxel_size; }
  double truncation() const { return cfg_.truncation; }

  VoxelKey key_of(const Vec3& p) const { return world_to_key(p, cfg_.voxel_size, cfg_.origin); }
  Vec3 center_of(const VoxelKey& k) const { return key_center(k, cfg_.voxel_size, cfg_.origin); }

  // Voxel-index range covered by the exploration bounds, [lo, hi) per axis.
  const VoxelKey& bounds_lo() const { return bounds_lo_; }
  const VoxelKey& bounds_hi() const { return bounds_hi_; }
  bool in_bounds(const VoxelKey& k) const {
    return k.x >= bounds_lo_.x && k.x < bounds_hi_.x && k.y >= bounds_lo_.y &&
           k.y < bounds_hi_.y && k.z >= bounds_lo_.z && k.z < bounds_hi_.z;
  }
  // Number of voxels in the bounded exploration domain (the |M| normalizer).
  int64_t domain_voxel_count() const;

  const TsdfVoxel* find(const VoxelKey& k) const;
  TsdfVoxel voxel(const VoxelKey& k) const {
    const TsdfVoxel* v = find(k);
    return v ? *v : TsdfVoxel{};
  }
  VoxelState state(const VoxelKey& k) const { return classify(voxel(k)); }
  VoxelState classify(const TsdfVoxel& v) const;

  double total_weight() const { return total_weight_; }
  size_t allocated_blocks() const { return blocks_.size(); }
  uint32_t scan_count() const { return scan_count_; }

  // Merges one scan. Every voxel between the sensor and the hit (plus the
  // truncation band behind it, or the full ray for misses) receives a
  // projective-distance observation with weight 1/r^2, r clamped to
  // min_obs_range. Returns the keys whose classification changed, sorted.
  // Throws if a surface hit lies outside [min_obs_range, max_obs_range] or
  // the sensor is outside the exploration bounds.
  std::vector<VoxelKey> integrate_scan(const Pose& sensor, const std::vector<HitPoint>& hits);

  // Merges a single free-space observation (distance = +truncation). Used to
  // seed the spawn volume; same update rule as integrate_scan.
  // Returns true if the voxel's classification changed.
  bool observe_free(const VoxelKey& k, double obs_weight);

  // Directly assigns a voxel's aggregated state (handcrafted grids, loaders).
  void set_voxel(const VoxelKey& k, double distance, double weight);

  // True iff no voxel whose center lies within `radius` of `position` is
  // Occupied or Unknown. Unknown space counts as unsafe.
  bool clearance_ok(const Vec3& position, double radius) const;

  // Deterministic iteration over all allocated voxels (block keys sorted).
  void for_each_allocated(const std::function<void(const VoxelKey&, const TsdfVoxel&)>& fn) const;

  // Flat binary record stream: 16-byte header (magic "TSDF", u32 version,
  // f32 voxel size, u32 record count) then (i32 x,y,z, f32 d, f32 w) per
  // observed voxel, little-endian.
  void dump_binary(std::ostream& out) const;

 private:
  static constexpr int kBlockSide = 8;
  static constexpr int kBlockVoxels = kBlockSide * kBlockSide * kBlockSide;

  struct Block {
    std::array<TsdfVoxel, kBlockVoxels> voxels{};
  };

  static VoxelKey block_key(const VoxelKey& k) {
    return VoxelKey{k.x >> 3, k.y >> 3, k.z >> 3};
  }
  static int block_index(const VoxelKey& k) {
    return (k.x & 7) + kBlockSide * ((k.y & 7) + kBlockSide * (k.z & 7));
  }

  TsdfVoxel& at_for_update(const VoxelKey& k);
  void merge_observation(const VoxelKey& k, double d_obs, double w_obs,
                         std::vector<VoxelKey>* changed);

  MapConfig cfg_;
  VoxelKey bounds_lo_;
  VoxelKey bounds_hi_;
  std::unordered_map<VoxelKey, std::unique_ptr<Block>, VoxelKeyHash> blocks_;
  double total_weight_ = 0.0;
  uint32_t scan_count_ = 0;
};

// Face / face+edge / full cube neighborhoods. Connectivity must be 6, 18 or 26.
std::vector<VoxelKey> neighbors(const VoxelKey& k, int connectivity);

// Offset tables for the three neighborhoods, unit offsets in {-1,0,1}^3.
const std::array<VoxelKey, 6>& neighbor_offsets_6();
const std::array<VoxelKey, 18>& neighbor_offsets_18();
const std::array<VoxelKey, 26>& neighbor_offsets_26();

}  // namespace nbv
