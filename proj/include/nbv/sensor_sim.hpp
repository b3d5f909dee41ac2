#pragma once

#include <random>
#include <vector>

#include "nbv/scene.hpp"
#include "nbv/types.hpp"

namespace nbv {

struct SensorModel {
  double r_min = 0.42;
  double r_max = 10.0;
  double vert_min = deg_to_rad(-35.0);
  double vert_max = deg_to_rad(30.0);
  double horiz_fov = 2.0 * M_PI;
  double az_step = deg_to_rad(1.0);
  double el_step = deg_to_rad(1.0);
  double range_noise_sigma = 0.0;  // optional Gaussian range perturbation

  int azimuth_count() const { return static_cast<int>(std::round(horiz_fov / az_step)); }
  int elevation_count() const {
    return static_cast<int>(std::round((vert_max - vert_min) / el_step));
  }
  int ray_count() const { return azimuth_count() * elevation_count(); }
};

// Casts one ray per (azimuth, elevation) cell of the field of view into the
// ground-truth grid. The first occupied cell inside [r_min, r_max] produces a
// SurfaceHit at the cell entry point; a surface closer than r_min blanks the
// ray (lidar blind zone, no return); otherwise the ray reports a MaxRangeMiss
// at exactly r_max. Deterministic for fixed inputs; `rng` is only consulted
// when range noise is enabled.
std::vector<HitPoint> scan(const GroundTruthScene& gt, const Pose& pose, const SensorModel& model,
                           std::mt19937_64* rng = nullptr);

// The max-range subset of a scan: rays not explained by a nearer surface hit,
// reinterpreted as observations of empty space.
std::vector<HitPoint> freespace_points(const std::vector<HitPoint>& hits);

}  // namespace nbv
