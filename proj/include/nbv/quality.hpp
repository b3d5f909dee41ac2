#pragma once

#include "nbv/frontier.hpp"
#include "nbv/scene.hpp"
#include "nbv/voxel_map.hpp"

namespace nbv {

// Quality target and the viewing-distance band derived from it under the
// 1/r^2 confidence model: one observation at distance d_star deposits exactly
// z_star of weight.
struct QualityConfig {
  double z_star = 0.0494;  // ~ d* = 4.5 m
  double w_max = 0.0494;   // saturation cap, equal to the target
  double d_star = 4.5;
  double eta = 0.5;        // half-width of the optimal-distance band
  double r_min = 0.42;
  double r_max = 10.0;
};

// d* = sqrt(1/z*), clamped to the sensor range. z_star of exactly zero maps
// to r_max (any distance satisfies a null target); negative or >1 targets are
// rejected.
double optimal_distance(double z_star, double r_min, double r_max);

// Builds a consistent config from the target confidence.
QualityConfig make_quality_config(double z_star, double eta = 0.5, double r_min = 0.42,
                                  double r_max = 10.0);
// Builds from a distance band [d_lo, d_hi]: d* is the midpoint, eta the
// half-width, z* = 1/d*^2.
QualityConfig quality_config_from_band(double d_lo, double d_hi, double r_min = 0.42,
                                       double r_max = 10.0);

// Average confidence over the bounded voxel domain, gated by completeness:
// zero while any reachable frontier remains.
double quality_Z(const VoxelMap& map, const FrontierSet& frontiers);

// As quality_Z but each voxel contributes at most w_max, so excess confidence
// cannot mask uncovered regions.
double quality_Z_sat(const VoxelMap& map, const FrontierSet& frontiers, double w_max);

// A-posteriori confidence: summed weight of the reconstructed surface voxels
// normalized by the ground-truth surface voxel count. Can exceed 1 when the
// reconstruction hallucinates surface.
double quality_Z_post(const VoxelMap& map, const GroundTruthScene& gt);

}  // namespace nbv
