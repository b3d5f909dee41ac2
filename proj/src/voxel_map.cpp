#include "nbv/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

namespace nbv {

namespace {

VoxelKey snap_index(const Vec3& p, double voxel_size, const Vec3& origin) {
  // Round so that bounds landing exactly on a voxel face stay exact.
  return VoxelKey{static_cast<int32_t>(std::lround((p.x() - origin.x()) / voxel_size)),
                  static_cast<int32_t>(std::lround((p.y() - origin.y()) / voxel_size)),
                  static_cast<int32_t>(std::lround((p.z() - origin.z()) / voxel_size))};
}

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

void put_i32(std::ostream& out, int32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

void put_f32(std::ostream& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

}  // namespace

VoxelMap::VoxelMap(const MapConfig& cfg) : cfg_(cfg) {
  if (cfg_.voxel_size <= 0.0) throw std::invalid_argument("voxel size must be positive");
  if (cfg_.truncation < 2.0 * cfg_.voxel_size)
    throw std::invalid_argument("truncation must be at least twice the voxel size");
  bounds_lo_ = snap_index(cfg_.bounds.min, cfg_.voxel_size, cfg_.origin);
  bounds_hi_ = snap_index(cfg_.bounds.max, cfg_.voxel_size, cfg_.origin);
  if (bounds_hi_.x <= bounds_lo_.x || bounds_hi_.y <= bounds_lo_.y || bounds_hi_.z <= bounds_lo_.z)
    throw std::invalid_argument("exploration bounds are degenerate");
}

int64_t VoxelMap::domain_voxel_count() const {
  return int64_t(bounds_hi_.x - bounds_lo_.x) * int64_t(bounds_hi_.y - bounds_lo_.y) *
         int64_t(bounds_hi_.z - bounds_lo_.z);
}

VoxelState VoxelMap::classify(const TsdfVoxel& v) const {
  if (v.weight <= 0.0) return VoxelState::Unknown;
  // Boundary d == voxel_size counts as Occupied.
  return v.distance > cfg_.voxel_size ? VoxelState::Empty : VoxelState::Occupied;
}

const TsdfVoxel* VoxelMap::find(const VoxelKey& k) const {
  auto it = blocks_.find(block_key(k));
  if (it == blocks_.end()) return nullptr;
  return &it->second->voxels[block_index(k)];
}

TsdfVoxel& VoxelMap::at_for_update(const VoxelKey& k) {
  auto& block = blocks_[block_key(k)];
  if (!block) block = std::make_unique<Block>();
  return block->voxels[block_index(k)];
}

void VoxelMap::merge_observation(const VoxelKey& k, double d_obs, double w_obs,
                                 std::vector<VoxelKey>* changed) {
  TsdfVoxel& v = at_for_update(k);
  const VoxelState before = classify(v);
  const double w_new = v.weight + w_obs;
  v.distance = (v.weight * v.distance + w_obs * d_obs) / w_new;
  v.weight = w_new;
  v.last_scan = scan_count_;
  total_weight_ += w_obs;
  if (changed && classify(v) != before) changed->push_back(k);
}

std::vector<VoxelKey> VoxelMap::integrate_scan(const Pose& sensor,
                                               const std::vector<HitPoint>& hits) {
  if (!cfg_.bounds.contains(sensor.position))
    throw std::invalid_argument("sensor pose outside exploration bounds");

  ++scan_count_;
  std::vector<VoxelKey> changed;
  const double tau = cfg_.truncation;

  for (const HitPoint& hit : hits) {
    const Vec3 offset = hit.point - sensor.position;
    const double range = offset.norm();
    if (range <= 0.0) throw std::invalid_argument("hit point coincides with the sensor");
    const Vec3 dir = offset / range;

    bool is_hit = hit.kind == HitPoint::Kind::SurfaceHit;
    if (is_hit) {
      if (range < cfg_.min_obs_range - 1e-9 || range > cfg_.max_obs_range + 1e-9)
        throw std::invalid_argument("surface hit outside the sensor range envelope");
    } else {
      if (std::abs(range - cfg_.max_obs_range) > 1e-3)
        throw std::invalid_argument("max-range miss not at maximum range");
    }

    const Vec3 end = is_hit ? Vec3(hit.point + tau * dir) : hit.point;

    walk_ray(sensor.position, end, cfg_.voxel_size, cfg_.origin,
             [&](const VoxelKey& k, double /*t_entry*/) {
               const Vec3 center = center_of(k);
               const double r = std::max((center - sensor.position).norm(), cfg_.min_obs_range);
               const double w_obs = 1.0 / (r * r);
               double d_obs = tau;
               if (is_hit) {
                 const double along = (center - sensor.position).dot(dir);
                 d_obs = std::clamp(range - along, -tau, tau);
               }
               merge_observation(k, d_obs, w_obs, &changed);
               return true;
             });
  }

  std::sort(changed.begin(), changed.end());
  changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
  return changed;
}

bool VoxelMap::observe_free(const VoxelKey& k, double obs_weight) {
  std::vector<VoxelKey> changed;
  merge_observation(k, cfg_.truncation, obs_weight, &changed);
  return !changed.empty();
}

void VoxelMap::set_voxel(const VoxelKey& k, double distance, double weight) {
  if (weight < 0.0) throw std::invalid_argument("voxel weight must be non-negative");
  TsdfVoxel& v = at_for_update(k);
  total_weight_ += weight - v.weight;
  v.distance = distance;
  v.weight = weight;
  v.last_scan = scan_count_;
}

bool VoxelMap::clearance_ok(const Vec3& position, double radius) const {
  if (radius <= 0.0) throw std::invalid_argument("clearance radius must be positive");
  const VoxelKey lo = key_of(position - Vec3::Constant(radius));
  const VoxelKey hi = key_of(position + Vec3::Constant(radius));
  const double r2 = radius * radius;
  for (int32_t x = lo.x; x <= hi.x; ++x)
    for (int32_t y = lo.y; y <= hi.y; ++y)
      for (int32_t z = lo.z; z <= hi.z; ++z) {
        const VoxelKey k{x, y, z};
        if ((center_of(k) - position).squaredNorm() > r2) continue;
        if (state(k) != VoxelState::Empty) return false;
      }
  return true;
}

void VoxelMap::for_each_allocated(
    const std::function<void(const VoxelKey&, const TsdfVoxel&)>& fn) const {
  std::vector<VoxelKey> block_keys;
  block_keys.reserve(blocks_.size());
  for (const auto& [bk, _] : blocks_) block_keys.push_back(bk);
  std::sort(block_keys.begin(), block_keys.end());
  for (const VoxelKey& bk : block_keys) {
    const Block& block = *blocks_.at(bk);
    for (int z = 0; z < kBlockSide; ++z)
      for (int y = 0; y < kBlockSide; ++y)
        for (int x = 0; x < kBlockSide; ++x) {
          const VoxelKey k{bk.x * kBlockSide + x, bk.y * kBlockSide + y, bk.z * kBlockSide + z};
          fn(k, block.voxels[block_index(k)]);
        }
  }
}

void VoxelMap::dump_binary(std::ostream& out) const {
  uint32_t count = 0;
  for_each_allocated([&](const VoxelKey&, const TsdfVoxel& v) {
    if (v.weight > 0.0) ++count;
  });
  out.write("TSDF", 4);
  put_u32(out, 1u);
  put_f32(out, static_cast<float>(cfg_.voxel_size));
  put_u32(out, count);
  for_each_allocated([&](const VoxelKey& k, const TsdfVoxel& v) {
    if (v.weight <= 0.0) return;
    put_i32(out, k.x);
    put_i32(out, k.y);
    put_i32(out, k.z);
    put_f32(out, static_cast<float>(v.distance));
    put_f32(out, static_cast<float>(v.weight));
  });
}

std::vector<VoxelKey> neighbors(const VoxelKey& k, int connectivity) {
  std::vector<VoxelKey> out;
  auto add = [&](const VoxelKey& off) {
    out.push_back(VoxelKey{k.x + off.x, k.y + off.y, k.z + off.z});
  };
  switch (connectivity) {
    case 6:
      out.reserve(6);
      for (const auto& o : neighbor_offsets_6()) add(o);
      break;
    case 18:
      out.reserve(18);
      for (const auto& o : neighbor_offsets_18()) add(o);
      break;
    case 26:
      out.reserve(26);
      for (const auto& o : neighbor_offsets_26()) add(o);
      break;
    default:
      throw std::invalid_argument("connectivity must be 6, 18 or 26");
  }
  return out;
}

namespace {

template <size_t N>
std::array<VoxelKey, N> build_offsets(int min_manhattan, int max_manhattan) {
  std::array<VoxelKey, N> out{};
  size_t n = 0;
  for (int32_t x = -1; x <= 1; ++x)
    for (int32_t y = -1; y <= 1; ++y)
      for (int32_t z = -1; z <= 1; ++z) {
        const int m = std::abs(x) + std::abs(y) + std::abs(z);
        if (m >= min_manhattan && m <= max_manhattan) out[n++] = VoxelKey{x, y, z};
      }
  return out;
}

}  // namespace

const std::array<VoxelKey, 6>& neighbor_offsets_6() {
  static const auto offsets = build_offsets<6>(1, 1);
  return offsets;
}

const std::array<VoxelKey, 18>& neighbor_offsets_18() {
  static const auto offsets = build_offsets<18>(1, 2);
  return offsets;
}

const std::array<VoxelKey, 26>& neighbor_offsets_26() {
  static const auto offsets = build_offsets<26>(1, 3);
  return offsets;
}

}  // namespace nbv
