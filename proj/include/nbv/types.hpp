#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace nbv {

using Vec3 = Eigen::Vector3d;

// Integer grid index of a voxel. World position of the voxel center is
// origin + (x+0.5, y+0.5, z+0.5) * voxel_size.
struct VoxelKey {
  int32_t x = 0;
  int32_t y = 0;
  int32_t z = 0;

  bool operator==(const VoxelKey& o) const { return x == o.x && y == o.y && z == o.z; }
  bool operator!=(const VoxelKey& o) const { return !(*this == o); }
  bool operator<(const VoxelKey& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

struct VoxelKeyHash {
  size_t operator()(const VoxelKey& k) const {
    return 73856093ULL * static_cast<uint32_t>(k.x) ^
           19349669ULL * static_cast<uint32_t>(k.y) ^
           83492791ULL * static_cast<uint32_t>(k.z);
  }
};

// Gravity-aligned sensor pose: position plus heading. The simulated lidar has a
// full horizontal field of view, so yaw only rotates the ray grid.
struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return p.x() >= min.x() && p.x() < max.x() && p.y() >= min.y() && p.y() < max.y() &&
           p.z() >= min.z() && p.z() < max.z();
  }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

inline VoxelKey world_to_key(const Vec3& p, double voxel_size, const Vec3& origin) {
  return VoxelKey{static_cast<int32_t>(std::floor((p.x() - origin.x()) / voxel_size)),
                  static_cast<int32_t>(std::floor((p.y() - origin.y()) / voxel_size)),
                  static_cast<int32_t>(std::floor((p.z() - origin.z()) / voxel_size))};
}

inline Vec3 key_center(const VoxelKey& k, double voxel_size, const Vec3& origin) {
  return origin + Vec3((k.x + 0.5) * voxel_size, (k.y + 0.5) * voxel_size, (k.z + 0.5) * voxel_size);
}

constexpr double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

// Elevation angle of a direction above the horizontal plane, in radians.
inline double elevation_of(const Vec3& dir) {
  const double h = std::hypot(dir.x(), dir.y());
  return std::atan2(dir.z(), h);
}

// One simulated lidar return. MaxRangeMiss marks a ray that reached full range
// without hitting anything; those carry the freespace information.
struct HitPoint {
  enum class Kind : uint8_t { SurfaceHit, MaxRangeMiss };

  Vec3 point = Vec3::Zero();
  Kind kind = Kind::SurfaceHit;
  Vec3 ray_dir = Vec3::UnitX();
};

}  // namespace nbv
