#include "nbv/view_evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "nbv/raycast.hpp"

namespace nbv {

double visibility(const VoxelMap& map, const Vec3& from, const VoxelKey& frontier) {
  const Vec3 target = map.center_of(frontier);
  bool blocked = false;
  int unknown = 0;
  walk_ray(from, target, map.voxel_size(), map.config().origin,
           [&](const VoxelKey& k, double /*t*/) {
             if (k == frontier) return true;  // the frontier borders occupied space by definition
             switch (map.state(k)) {
               case VoxelState::Occupied:
                 blocked = true;
                 return false;
               case VoxelState::Unknown:
                 ++unknown;
                 return true;
               case VoxelState::Empty:
                 return true;
             }
             return true;
           });
  if (blocked) return 0.0;
  return std::exp(-double(unknown));
}

double distance_weight(double d, const QualityConfig& q) {
  if (std::abs(d - q.d_star) < q.eta) return 1.0;
  if (d <= q.d_star - q.eta) return 0.5;
  return 0.5 * (1.0 - d / q.r_max);
}

std::pair<double, int> info_gain(const VoxelMap& map, const ViewCandidate& v,
                                 const FrontierSet& frontiers, const QualityConfig& q) {
  double j_raw = 0.0;
  int visible = 0;
  for (const auto& [key, f] : frontiers.frontiers) {
    const double d = (map.center_of(key) - v.position).norm();
    if (d > q.r_max) continue;
    const double vis = visibility(map, v.position, key);
    if (vis > 0.0) ++visible;
    j_raw += distance_weight(d, q) * vis;
  }
  return {j_raw, visible};
}

double heading_alignment(const RobotState& state, const Vec3& candidate_position,
                         double eps_velocity) {
  const double speed = state.velocity.norm();
  if (speed < eps_velocity) return 1.0;
  const Vec3 to_candidate = candidate_position - state.position;
  const double dist = to_candidate.norm();
  if (dist < 1e-12) return 1.0;
  const double cosang =
      std::clamp(state.velocity.dot(to_candidate) / (speed * dist), -1.0, 1.0);
  return 1.0 - std::acos(cosang) / M_PI;
}

double nav_score(const RobotState& state, const ViewCandidate& v,
                 const std::vector<ViewCandidate>& all, const EvaluationConfig& cfg) {
  if (all.empty()) throw std::invalid_argument("nav_score with no candidates");
  const double psi = heading_alignment(state, v.position, cfg.eps_velocity);
  const double dist = (v.position - state.position).norm();
  if (dist < cfg.eps_distance) return psi;
  double nearest = std::numeric_limits<double>::infinity();
  for (const ViewCandidate& other : all)
    nearest = std::min(nearest, (other.position - state.position).norm());
  return psi * nearest / dist;
}

std::vector<ScoreBreakdown> score_candidates(const VoxelMap& map, const RobotState& state,
                                             const std::vector<ViewCandidate>& candidates,
                                             const FrontierSet& frontiers, const QualityConfig& q,
                                             const EvaluationConfig& cfg) {
  std::vector<ScoreBreakdown> scores(candidates.size());
  int max_visible = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto [j_raw, visible] = info_gain(map, candidates[i], frontiers, q);
    scores[i].j_raw = j_raw;
    scores[i].visible_count = visible;
    max_visible = std::max(max_visible, visible);
  }
  for (size_t i = 0; i < candidates.size(); ++i) {
    scores[i].j_info = max_visible > 0 ? scores[i].j_raw / double(max_visible) : 0.0;
    scores[i].j_nav = nav_score(state, candidates[i], candidates, cfg);
    scores[i].total = cfg.alpha * scores[i].j_info + cfg.beta * scores[i].j_nav;
  }
  return scores;
}

size_t select_best(const std::vector<ViewCandidate>& candidates,
                   const std::vector<ScoreBreakdown>& scores, const Vec3& robot_position) {
  if (candidates.empty())
    throw std::invalid_argument("select_best on an empty candidate list");
  if (candidates.size() != scores.size())
    throw std::invalid_argument("candidate/score size mismatch");

  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    const double a = scores[i].total;
    const double b = scores[best].total;
    if (a > b) {
      best = i;
      continue;
    }
    if (a < b) continue;
    const double da = (candidates[i].position - robot_position).norm();
    const double db = (candidates[best].position - robot_position).norm();
    if (da < db || (da == db && candidates[i].frontier_key < candidates[best].frontier_key))
      best = i;
  }
  return best;
}

void write_scores_csv(const std::vector<ViewCandidate>& candidates,
                      const std::vector<ScoreBreakdown>& scores, size_t selected,
                      std::ostream& out) {
  out << "x,y,z,band,j_raw,visible,j_info,j_nav,total,selected\n";
  for (size_t i = 0; i < candidates.size(); ++i) {
    const ViewCandidate& v = candidates[i];
    const ScoreBreakdown& s = scores[i];
    out << v.position.x() << ',' << v.position.y() << ',' << v.position.z() << ','
        << band_name(v.band) << ',' << s.j_raw << ',' << s.visible_count << ',' << s.j_info << ','
        << s.j_nav << ',' << s.total << ',' << (i == selected ? 1 : 0) << '\n';
  }
}

}  // namespace nbv
