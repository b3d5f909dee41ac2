#include "nbv/quality.hpp"

#include <cmath>
#include <stdexcept>

namespace nbv {

double optimal_distance(double z_star, double r_min, double r_max) {
  if (z_star < 0.0 || z_star > 1.0)
    throw std::invalid_argument("quality target must lie in [0, 1]");
  if (z_star == 0.0) return r_max;
  return std::clamp(std::sqrt(1.0 / z_star), r_min, r_max);
}

QualityConfig make_quality_config(double z_star, double eta, double r_min, double r_max) {
  if (eta <= 0.0) throw std::invalid_argument("quality band half-width must be positive");
  QualityConfig q;
  q.z_star = z_star;
  q.w_max = z_star;
  q.r_min = r_min;
  q.r_max = r_max;
  q.d_star = optimal_distance(z_star, r_min, r_max);
  // Keep the band's lower edge positive; consumers clamp the upper edge to
  // the sensor range where it matters.
  q.eta = std::min(eta, 0.9 * q.d_star);
  return q;
}

QualityConfig quality_config_from_band(double d_lo, double d_hi, double r_min, double r_max) {
  if (!(d_lo > 0.0 && d_hi > d_lo)) throw std::invalid_argument("bad distance band");
  const double d_star = 0.5 * (d_lo + d_hi);
  QualityConfig q = make_quality_config(1.0 / (d_star * d_star), 0.5 * (d_hi - d_lo), r_min, r_max);
  return q;
}

namespace {

double bounded_weight_sum(const VoxelMap& map, double w_max) {
  double sum = 0.0;
  map.for_each_allocated([&](const VoxelKey& k, const TsdfVoxel& v) {
    if (v.weight <= 0.0 || !map.in_bounds(k)) return;
    sum += std::min(v.weight, w_max);
  });
  return sum;
}

}  // namespace

double quality_Z(const VoxelMap& map, const FrontierSet& frontiers) {
  if (!frontiers.reachable_empty()) return 0.0;
  return bounded_weight_sum(map, std::numeric_limits<double>::infinity()) /
         double(map.domain_voxel_count());
}

double quality_Z_sat(const VoxelMap& map, const FrontierSet& frontiers, double w_max) {
  if (w_max <= 0.0) throw std::invalid_argument("weight cap must be positive");
  if (!frontiers.reachable_empty()) return 0.0;
  return bounded_weight_sum(map, w_max) / double(map.domain_voxel_count());
}

double quality_Z_post(const VoxelMap& map, const GroundTruthScene& gt) {
  if (std::abs(map.voxel_size() - gt.voxel_size()) > 1e-12 ||
      (map.config().origin - gt.origin()).norm() > 1e-9)
    throw std::invalid_argument("map and ground truth grids are not aligned");
  if (gt.surface_keys().empty()) return 0.0;

  // Reconstructed surface voxels: occupied with a non-occupied 6-neighbor.
  double sum = 0.0;
  map.for_each_allocated([&](const VoxelKey& k, const TsdfVoxel& v) {
    if (map.classify(v) != VoxelState::Occupied) return;
    for (const VoxelKey& off : neighbor_offsets_6()) {
      if (map.state(VoxelKey{k.x + off.x, k.y + off.y, k.z + off.z}) != VoxelState::Occupied) {
        sum += v.weight;
        return;
      }
    }
  });
  return sum / double(gt.surface_keys().size());
}

}  // namespace nbv
