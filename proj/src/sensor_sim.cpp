#include "nbv/sensor_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "nbv/raycast.hpp"

namespace nbv {

std::vector<HitPoint> scan(const GroundTruthScene& gt, const Pose& pose, const SensorModel& model,
                           std::mt19937_64* rng) {
  if (model.r_min >= model.r_max) throw std::invalid_argument("sensor range envelope inverted");
  if (model.vert_min >= model.vert_max) throw std::invalid_argument("vertical FoV inverted");
  if (!gt.grid_box().contains(pose.position))
    throw std::invalid_argument("sensor pose outside the scene grid");
  if (gt.occupied(gt.key_of(pose.position)))
    throw std::runtime_error("sensor pose inside an occupied voxel");
  if (model.range_noise_sigma > 0.0 && rng == nullptr)
    throw std::invalid_argument("range noise requested without an RNG");

  std::normal_distribution<double> noise(0.0, model.range_noise_sigma);
  const int n_az = model.azimuth_count();
  const int n_el = model.elevation_count();
  std::vector<HitPoint> hits;
  hits.reserve(static_cast<size_t>(n_az) * n_el);

  for (int ia = 0; ia < n_az; ++ia) {
    const double az = pose.yaw + (ia + 0.5) * model.az_step;
    for (int ie = 0; ie < n_el; ++ie) {
      const double el = model.vert_min + (ie + 0.5) * model.el_step;
      const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Vec3 end = pose.position + model.r_max * dir;

      double hit_t = -1.0;
      bool blind = false;
      walk_ray(pose.position, end, gt.voxel_size(), gt.origin(), [&](const VoxelKey& k, double t) {
        if (!gt.occupied(k)) return true;
        if (t < model.r_min) {
          blind = true;  // surface inside the blind zone: no return at all
          return false;
        }
        hit_t = t;
        return false;
      });

      if (blind) continue;
      if (hit_t >= 0.0) {
        double r = hit_t;
        if (model.range_noise_sigma > 0.0) {
          r = std::clamp(r + noise(*rng), model.r_min, model.r_max);
        }
        hits.push_back(HitPoint{pose.position + r * dir, HitPoint::Kind::SurfaceHit, dir});
      } else {
        hits.push_back(HitPoint{end, HitPoint::Kind::MaxRangeMiss, dir});
      }
    }
  }
  return hits;
}

std::vector<HitPoint> freespace_points(const std::vector<HitPoint>& hits) {
  std::vector<HitPoint> out;
  for (const HitPoint& h : hits)
    if (h.kind == HitPoint::Kind::MaxRangeMiss) out.push_back(h);
  return out;
}

}  // namespace nbv
