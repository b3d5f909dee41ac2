#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>

#include "nbv/types.hpp"

namespace nbv {

// Amanatides-Woo voxel traversal from `from` to `to`. Visits every voxel the
// segment passes through in order, starting with the voxel containing `from`.
// The visitor gets (key, t_entry) where t_entry is the distance along the ray
// at which the segment enters the voxel (0 for the first one). Return false
// from the visitor to stop early. Ties on cell corners are broken on the
// lowest axis index, deterministically.
template <typename Visitor>
void walk_ray(const Vec3& from, const Vec3& to, double voxel_size, const Vec3& grid_origin,
              Visitor&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();

  VoxelKey key = world_to_key(from, voxel_size, grid_origin);
  const VoxelKey end_key = world_to_key(to, voxel_size, grid_origin);

  if (!visit(key, 0.0)) return;
  if (key == end_key) return;

  const Vec3 d = to - from;
  const double len = d.norm();
  if (len <= 0.0) return;
  const Vec3 u = d / len;

  int32_t idx[3] = {key.x, key.y, key.z};
  const int32_t end_idx[3] = {end_key.x, end_key.y, end_key.z};
  int step[3];
  double t_max[3];
  double t_delta[3];

  for (int i = 0; i < 3; ++i) {
    if (u[i] > 0.0) {
      step[i] = 1;
      t_delta[i] = voxel_size / u[i];
      const double boundary = grid_origin[i] + (idx[i] + 1) * voxel_size;
      t_max[i] = (boundary - from[i]) / u[i];
    } else if (u[i] < 0.0) {
      step[i] = -1;
      t_delta[i] = -voxel_size / u[i];
      const double boundary = grid_origin[i] + idx[i] * voxel_size;
      t_max[i] = (boundary - from[i]) / u[i];
    } else {
      step[i] = 0;
      t_delta[i] = kInf;
      t_max[i] = kInf;
    }
  }

  // Generous bound against float-degenerate loops.
  int64_t guard = 3 + std::llabs(end_idx[0] - idx[0]) + std::llabs(end_idx[1] - idx[1]) +
                  std::llabs(end_idx[2] - idx[2]);

  while (guard-- > 0) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    const double t = t_max[axis];
    if (t > len) return;
    idx[axis] += step[axis];
    t_max[axis] += t_delta[axis];
    key = VoxelKey{idx[0], idx[1], idx[2]};
    if (!visit(key, t)) return;
    if (key == end_key) return;
  }
}

}  // namespace nbv
