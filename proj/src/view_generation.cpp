#include "nbv/view_generation.hpp"

#include <cmath>
#include <stdexcept>

namespace nbv {

const char* band_name(Band b) {
  switch (b) {
    case Band::Optimal: return "optimal";
    case Band::Close: return "close";
    case Band::Long: return "long";
  }
  return "?";
}

GenerationSchedule GenerationSchedule::from(const QualityConfig& q) {
  GenerationSchedule s;
  const double band_lo = std::max(q.d_star - q.eta, q.r_min);
  const double band_hi = std::min(q.d_star + q.eta, q.r_max);
  s.optimal = std::clamp(q.d_star, q.r_min, q.r_max);
  s.close = std::max(q.r_min, 0.5 * (band_lo + q.r_min));
  s.long_range = std::min(q.r_max, band_hi + 0.5 * (q.r_max - band_hi));
  return s;
}

double GenerationSchedule::distance(Band b) const {
  switch (b) {
    case Band::Optimal: return optimal;
    case Band::Close: return close;
    case Band::Long: return long_range;
  }
  return optimal;
}

Vec3 rotation_fallback(const Vec3& normal, int attempt, const GenerationConfig& cfg) {
  if (attempt < 0 || attempt >= cfg.max_horizontal_rotations)
    throw std::out_of_range("rotation attempt outside the schedule");

  // Looking back at the frontier along -dir must stay inside the vertical FoV,
  // and so must the sampling direction itself; clamp the elevation into the
  // intersection of the two constraints.
  const double lo = std::max(cfg.vert_min, -cfg.vert_max);
  const double hi = std::min(cfg.vert_max, -cfg.vert_min);
  double elevation = elevation_of(normal);
  elevation = std::clamp(elevation, lo, hi);

  double azimuth = std::atan2(normal.y(), normal.x());
  if (std::hypot(normal.x(), normal.y()) < 1e-12) azimuth = 0.0;  // vertical normal: pick +x

  // attempt 0 keeps the corrected direction; 1,2 -> +/-step; 3,4 -> +/-2 step.
  const int k = (attempt + 1) / 2;
  const double sign = (attempt % 2 == 1) ? 1.0 : -1.0;
  if (attempt > 0) azimuth += sign * k * cfg.horizontal_step;

  const double ce = std::cos(elevation);
  return Vec3(ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation));
}

namespace {

bool candidate_valid(const VoxelMap& map, const Vec3& position, const Vec3& frontier_center,
                     const GenerationConfig& cfg) {
  const Aabb& bounds = map.config().bounds;
  if (!bounds.contains(position)) return false;
  const double el = elevation_of(frontier_center - position);
  if (el < cfg.vert_min || el > cfg.vert_max) return false;
  return map.clearance_ok(position, cfg.robot_radius);
}

}  // namespace

std::vector<ViewCandidate> generate_views(const VoxelMap& map, FrontierSet& frontiers,
                                          const QualityConfig& q, const GenerationConfig& cfg,
                                          std::map<VoxelKey, ViewCandidate>* cache) {
  const GenerationSchedule schedule = GenerationSchedule::from(q);
  std::vector<ViewCandidate> out;
  std::vector<VoxelKey> failed;

  for (const auto& [key, cached_frontier] : frontiers.frontiers) {
    const Vec3 frontier_center = map.center_of(key);

    if (cache) {
      auto it = cache->find(key);
      if (it != cache->end()) {
        if (candidate_valid(map, it->second.position, frontier_center, cfg)) {
          out.push_back(it->second);
          continue;
        }
        cache->erase(it);
      }
    }

    // Normals drift as neighbor confidence accumulates; use a fresh one.
    const std::optional<Vec3> normal = surface_normal(map, key);
    if (!normal) continue;  // degenerate frontier, excluded from generation

    bool found = false;
    for (Band band : {Band::Optimal, Band::Close, Band::Long}) {
      const double d = schedule.distance(band);
      for (int attempt = 0; attempt < cfg.max_horizontal_rotations && !found; ++attempt) {
        const Vec3 dir = rotation_fallback(*normal, attempt, cfg);
        const Vec3 position = frontier_center + d * dir;
        if (!candidate_valid(map, position, frontier_center, cfg)) continue;
        ViewCandidate v;
        v.position = position;
        v.view_dir = (frontier_center - position).normalized();
        v.frontier_key = key;
        v.band = band;
        out.push_back(v);
        if (cache) (*cache)[key] = v;
        found = true;
      }
      if (found) break;
    }
    if (!found) failed.push_back(key);
  }

  for (const VoxelKey& key : failed) {
    mark_unreachable(frontiers, key);
    if (cache) cache->erase(key);
  }
  if (cache) {
    // Drop cache entries for frontiers that no longer exist.
    for (auto it = cache->begin(); it != cache->end();) {
      if (!frontiers.frontiers.count(it->first))
        it = cache->erase(it);
      else
        ++it;
    }
  }
  return out;
}

}  // namespace nbv
