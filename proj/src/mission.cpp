#include "nbv/mission.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace nbv {

TrapezoidalProfile::TrapezoidalProfile(double length, double v_max, double a_max)
    : length_(length), a_max_(a_max) {
  if (length < 0.0 || v_max <= 0.0 || a_max <= 0.0)
    throw std::invalid_argument("bad trapezoidal profile parameters");
  v_max_ = std::min(v_max, std::sqrt(a_max * length));
  t_ramp_ = v_max_ / a_max;
  const double ramp_dist = 0.5 * a_max * t_ramp_ * t_ramp_;
  const double cruise_dist = std::max(0.0, length - 2.0 * ramp_dist);
  t_cruise_ = v_max_ > 0.0 ? cruise_dist / v_max_ : 0.0;
  duration_ = 2.0 * t_ramp_ + t_cruise_;
}

double TrapezoidalProfile::position(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= duration_) return length_;
  if (t < t_ramp_) return 0.5 * a_max_ * t * t;
  const double ramp_dist = 0.5 * a_max_ * t_ramp_ * t_ramp_;
  if (t < t_ramp_ + t_cruise_) return ramp_dist + v_max_ * (t - t_ramp_);
  const double td = duration_ - t;
  return length_ - 0.5 * a_max_ * td * td;
}

double TrapezoidalProfile::speed(double t) const {
  if (t <= 0.0 || t >= duration_) return 0.0;
  if (t < t_ramp_) return a_max_ * t;
  if (t < t_ramp_ + t_cruise_) return v_max_;
  return a_max_ * (duration_ - t);
}

double TrapezoidalProfile::time_at(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= length_) return duration_;
  const double ramp_dist = 0.5 * a_max_ * t_ramp_ * t_ramp_;
  if (s < ramp_dist) return std::sqrt(2.0 * s / a_max_);
  if (s < ramp_dist + v_max_ * t_cruise_) return t_ramp_ + (s - ramp_dist) / v_max_;
  return duration_ - std::sqrt(std::max(0.0, 2.0 * (length_ - s) / a_max_));
}

const char* planner_name(PlannerKind k) {
  switch (k) {
    case PlannerKind::QualityGuided: return "ours";
    case PlannerKind::ClosestFrontier: return "closest-frontier";
    case PlannerKind::FrontierCount: return "frontier-count";
  }
  return "?";
}

std::optional<PlannerKind> planner_from_name(const std::string& name) {
  if (name == "ours" || name == "quality-guided") return PlannerKind::QualityGuided;
  if (name == "closest-frontier") return PlannerKind::ClosestFrontier;
  if (name == "frontier-count") return PlannerKind::FrontierCount;
  return std::nullopt;
}

namespace {

// Clearance check along a segment at half-voxel steps, both endpoints
// included. Samples closer to `from` than skip_near are assumed already
// validated (the robot stands there).
bool segment_clear(const VoxelMap& map, const Vec3& from, const Vec3& to, double radius,
                   double skip_near = 0.0) {
  const double len = (to - from).norm();
  const double step = 0.5 * map.voxel_size();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const double s = len * double(i) / double(n);
    if (s < skip_near) continue;
    const Vec3 p = from + (len > 0.0 ? s / len : 0.0) * (to - from);
    if (!map.clearance_ok(p, radius)) return false;
  }
  return true;
}

struct AStarNode {
  double f = 0.0;
  double g = 0.0;
  VoxelKey key;

  bool operator>(const AStarNode& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g > o.g;
    return o.key < key;
  }
};

std::optional<PathPlan> plan_path_impl(const VoxelMap& map, const Vec3& from, const Vec3& to,
                                       double radius, bool allow_unsafe_start) {
  if (!allow_unsafe_start && !map.clearance_ok(from, radius))
    throw std::invalid_argument("path start without clearance");

  auto finish = [&](std::vector<Vec3> pts) {
    PathPlan plan;
    plan.points = std::move(pts);
    for (size_t i = 0; i + 1 < plan.points.size(); ++i)
      plan.length += (plan.points[i + 1] - plan.points[i]).norm();
    return plan;
  };

  const double skip = allow_unsafe_start ? radius : 0.0;
  if (segment_clear(map, from, to, radius, skip)) return finish({from, to});

  // Grid search over known-free space inflated by the radius.
  std::unordered_map<VoxelKey, int8_t, VoxelKeyHash> passable_cache;
  auto passable = [&](const VoxelKey& k) {
    if (!map.in_bounds(k)) return false;
    auto it = passable_cache.find(k);
    if (it != passable_cache.end()) return it->second != 0;
    const bool ok = map.clearance_ok(map.center_of(k), radius);
    passable_cache.emplace(k, ok ? 1 : 0);
    return ok;
  };

  const VoxelKey start = map.key_of(from);
  VoxelKey goal = map.key_of(to);
  if (!passable(goal)) {
    // The goal point has clearance but its voxel center may sit marginally
    // closer to a wall; fall back to the best adjacent center.
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const VoxelKey& off : neighbor_offsets_26()) {
      const VoxelKey n{goal.x + off.x, goal.y + off.y, goal.z + off.z};
      if (!passable(n)) continue;
      const double d = (map.center_of(n) - to).norm();
      if (d < best) {
        best = d;
        goal = n;
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }

  const double ds = map.voxel_size();
  auto heuristic = [&](const VoxelKey& k) { return (map.center_of(k) - map.center_of(goal)).norm(); };

  std::priority_queue<AStarNode, std::vector<AStarNode>, std::greater<AStarNode>> open;
  std::unordered_map<VoxelKey, double, VoxelKeyHash> g_cost;
  std::unordered_map<VoxelKey, VoxelKey, VoxelKeyHash> parent;
  open.push({heuristic(start), 0.0, start});
  g_cost[start] = 0.0;

  constexpr size_t kMaxExpansions = 400000;
  size_t expansions = 0;
  bool reached = false;
  while (!open.empty()) {
    const AStarNode node = open.top();
    open.pop();
    if (node.g > g_cost[node.key] + 1e-12) continue;  // stale entry
    if (node.key == goal) {
      reached = true;
      break;
    }
    if (++expansions > kMaxExpansions) return std::nullopt;
    for (const VoxelKey& off : neighbor_offsets_26()) {
      const VoxelKey n{node.key.x + off.x, node.key.y + off.y, node.key.z + off.z};
      if (!passable(n)) continue;
      const double step = ds * std::sqrt(double(off.x * off.x + off.y * off.y + off.z * off.z));
      const double g = node.g + step;
      auto it = g_cost.find(n);
      if (it != g_cost.end() && it->second <= g + 1e-12) continue;
      g_cost[n] = g;
      parent[n] = node.key;
      open.push({g + heuristic(n), g, n});
    }
  }
  if (!reached) return std::nullopt;

  std::vector<Vec3> centers;
  for (VoxelKey k = goal;; k = parent.at(k)) {
    centers.push_back(map.center_of(k));
    if (k == start) break;
  }
  std::reverse(centers.begin(), centers.end());

  std::vector<Vec3> pts;
  pts.push_back(from);
  for (const Vec3& c : centers) pts.push_back(c);
  // Final leg from the goal center to the exact requested point.
  if ((pts.back() - to).norm() > 1e-9) {
    if (!segment_clear(map, pts.back(), to, radius)) return std::nullopt;
    pts.push_back(to);
  }

  // Greedy shortcutting: jump to the farthest waypoint reachable in a
  // straight clear line.
  std::vector<Vec3> shortcut;
  shortcut.push_back(pts.front());
  size_t i = 0;
  while (i + 1 < pts.size()) {
    size_t best = i + 1;
    for (size_t j = pts.size() - 1; j > i + 1; --j) {
      const double skip_here = (i == 0) ? skip : 0.0;
      if (segment_clear(map, pts[i], pts[j], radius, skip_here)) {
        best = j;
        break;
      }
    }
    shortcut.push_back(pts[best]);
    i = best;
  }
  return finish(std::move(shortcut));
}

}  // namespace

std::optional<PathPlan> plan_path(const VoxelMap& map, const Vec3& from, const Vec3& to,
                                  double radius) {
  return plan_path_impl(map, from, to, radius, false);
}

size_t baseline_select(const std::vector<ViewCandidate>& candidates,
                       const std::vector<ScoreBreakdown>& scores, PlannerKind kind,
                       const Vec3& robot_position) {
  if (candidates.empty())
    throw std::invalid_argument("baseline_select on an empty candidate list");
  if (kind == PlannerKind::QualityGuided)
    return select_best(candidates, scores, robot_position);

  auto dist = [&](size_t i) { return (candidates[i].position - robot_position).norm(); };
  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    if (kind == PlannerKind::ClosestFrontier) {
      const double da = dist(i), db = dist(best);
      if (da < db || (da == db && candidates[i].frontier_key < candidates[best].frontier_key))
        best = i;
    } else {  // FrontierCount
      const int ca = scores[i].visible_count, cb = scores[best].visible_count;
      if (ca > cb) {
        best = i;
      } else if (ca == cb) {
        const double da = dist(i), db = dist(best);
        if (da < db || (da == db && candidates[i].frontier_key < candidates[best].frontier_key))
          best = i;
      }
    }
  }
  return best;
}

namespace {

Vec3 path_point_at(const std::vector<Vec3>& pts, double s) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = (pts[i + 1] - pts[i]).norm();
    if (acc + seg >= s || i + 2 == pts.size()) {
      const double local = seg > 0.0 ? std::clamp((s - acc) / seg, 0.0, 1.0) : 0.0;
      return pts[i] + local * (pts[i + 1] - pts[i]);
    }
    acc += seg;
  }
  return pts.back();
}

Vec3 path_tangent_at(const std::vector<Vec3>& pts, double s) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = (pts[i + 1] - pts[i]).norm();
    if ((acc + seg >= s && seg > 0.0) || i + 2 == pts.size())
      return seg > 0.0 ? Vec3((pts[i + 1] - pts[i]) / seg) : Vec3::UnitX();
    acc += seg;
  }
  return Vec3::UnitX();
}

}  // namespace

MissionResult run_mission(const GroundTruthScene& scene, const MissionConfig& cfg,
                          const QualityConfig& q, const MissionHooks* hooks) {
  if (cfg.time_limit_s <= 0.0) throw std::invalid_argument("time limit must be positive");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0 || cfg.beta < 0.0 || cfg.beta > 1.0)
    throw std::invalid_argument("score weights must lie in [0, 1]");

  std::mt19937_64 rng(cfg.seed);

  // Resolve the start pose; the seed jitters it inside the collision-free
  // neighborhood so repeated runs explore from distinct poses.
  Vec3 start = cfg.start;
  const bool explicit_start = !std::isnan(start.x());
  if (!explicit_start) {
    start = scene.suggested_start();
    if (cfg.jitter_start) {
      std::uniform_real_distribution<double> dxy(-1.0, 1.0);
      std::uniform_real_distribution<double> dz(-0.25, 0.25);
      for (int attempt = 0; attempt < 64; ++attempt) {
        const Vec3 trial = scene.suggested_start() + Vec3(dxy(rng), dxy(rng), dz(rng));
        if (scene.exploration_bounds().contains(trial) &&
            scene.clearance_in_gt(trial, cfg.robot_radius)) {
          start = trial;
          break;
        }
      }
    }
  }
  if (!scene.clearance_in_gt(start, cfg.robot_radius))
    throw std::runtime_error("start pose is not collision-free in the scene");
  if (!scene.exploration_bounds().contains(start))
    throw std::runtime_error("start pose outside the exploration bounds");

  MapConfig mc;
  mc.voxel_size = scene.voxel_size();
  mc.truncation = 4.0 * mc.voxel_size;
  mc.origin = scene.origin();
  mc.bounds = scene.exploration_bounds();
  mc.min_obs_range = cfg.sensor.r_min;
  mc.max_obs_range = cfg.sensor.r_max;
  VoxelMap map(mc);

  // Takeoff bootstrap: the discrete scan cadence never observes the sensor's
  // own vertical blind cones, so certify the spawn cylinder from the scene
  // the same way a real takeoff sequence would. Only voxels verified free in
  // the ground truth are seeded.
  {
    const double seed_r = 2.0 * cfg.robot_radius;
    const double seed_h = 2.0 * cfg.robot_radius;
    const VoxelKey lo = map.key_of(start - Vec3(seed_r, seed_r, seed_h));
    const VoxelKey hi = map.key_of(start + Vec3(seed_r, seed_r, seed_h));
    for (int32_t x = lo.x; x <= hi.x; ++x)
      for (int32_t y = lo.y; y <= hi.y; ++y)
        for (int32_t z = lo.z; z <= hi.z; ++z) {
          const VoxelKey k{x, y, z};
          const Vec3 c = map.center_of(k);
          if (std::hypot(c.x() - start.x(), c.y() - start.y()) > seed_r) continue;
          if (std::abs(c.z() - start.z()) > seed_h) continue;
          if (!scene.in_grid(k) || scene.occupied(k)) continue;
          const double r = std::max((c - start).norm(), cfg.sensor.r_min);
          map.observe_free(k, 1.0 / (r * r));
        }
  }

  GenerationConfig gen = cfg.generation;
  gen.robot_radius = cfg.robot_radius;
  gen.vert_min = cfg.sensor.vert_min;
  gen.vert_max = cfg.sensor.vert_max;

  EvaluationConfig eval;
  eval.alpha = cfg.alpha;
  eval.beta = cfg.beta;
  eval.eps_distance = map.voxel_size();

  MissionLog log;
  log.start = start;

  RobotState state;
  state.position = start;

  FrontierSet frontiers;
  std::map<VoxelKey, ViewCandidate> view_cache;

  double now = 0.0;
  std::mt19937_64 noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64* noise = cfg.sensor.range_noise_sigma > 0.0 ? &noise_rng : nullptr;

  auto do_scan = [&](const Vec3& position, double yaw, bool full_extract) {
    const Pose pose{position, yaw};
    const std::vector<HitPoint> hits = scan(scene, pose, cfg.sensor, noise);
    const std::vector<VoxelKey> changed = map.integrate_scan(pose, hits);
    if (full_extract)
      frontiers = extract_frontiers(map, &frontiers);
    else
      update_frontiers(frontiers, map, changed);
    now += cfg.scan_duration_s;
    ++log.scan_total;
  };

  log.trajectory.push_back({0.0, start, state.yaw});
  do_scan(start, state.yaw, /*full_extract=*/true);

  VoxelKey last_goal{INT32_MIN, INT32_MIN, INT32_MIN};
  Vec3 last_select_pos = start;
  int stall_count = 0;
  int round = 0;
  MissionStatus status = MissionStatus::TimeLimit;

  while (true) {
    if (frontiers.reachable_empty()) {
      status = MissionStatus::CompleteByExhaustion;
      break;
    }
    if (now >= cfg.time_limit_s) {
      status = MissionStatus::TimeLimit;
      break;
    }
    ++round;

    RoundRecord rec;
    rec.round = round;
    rec.sim_time = now;
    rec.position = state.position;
    rec.velocity = state.velocity;

    std::vector<ViewCandidate> candidates = generate_views(map, frontiers, q, gen, &view_cache);
    if (candidates.empty()) {
      // Whatever remains has a degenerate normal; no admissible view can be
      // derived for it.
      std::vector<VoxelKey> leftovers;
      for (const auto& [k, f] : frontiers.frontiers) leftovers.push_back(k);
      for (const VoxelKey& k : leftovers) mark_unreachable(frontiers, k);
      continue;
    }

    std::vector<ScoreBreakdown> scores =
        score_candidates(map, state, candidates, frontiers, q, eval);

    std::optional<PathPlan> plan;
    size_t chosen = 0;
    while (!candidates.empty()) {
      chosen = baseline_select(candidates, scores, cfg.planner, state.position);
      plan = plan_path_impl(map, state.position, candidates[chosen].position, cfg.robot_radius,
                            /*allow_unsafe_start=*/true);
      if (plan) break;
      // Unreachable by navigation: demote the frontier and rescore.
      mark_unreachable(frontiers, candidates[chosen].frontier_key);
      view_cache.erase(candidates[chosen].frontier_key);
      candidates.erase(candidates.begin() + static_cast<ptrdiff_t>(chosen));
      if (!candidates.empty()) scores = score_candidates(map, state, candidates, frontiers, q, eval);
    }
    if (!plan) continue;

    const ViewCandidate selected = candidates[chosen];

    // A frontier repeatedly selected from the same pose yields nothing new;
    // treat it as unscannable.
    if (selected.frontier_key == last_goal &&
        (state.position - last_select_pos).norm() < 0.1) {
      if (++stall_count >= 2) {
        mark_unreachable(frontiers, selected.frontier_key);
        view_cache.erase(selected.frontier_key);
        stall_count = 0;
        continue;
      }
    } else {
      stall_count = 0;
    }
    last_goal = selected.frontier_key;
    last_select_pos = state.position;

    if (hooks && hooks->on_planned_leg) hooks->on_planned_leg(map, plan->points);
    if (hooks && hooks->on_scores) hooks->on_scores(round, candidates, scores, chosen);

    rec.selected_position = selected.position;
    rec.selected_frontier = selected.frontier_key;
    rec.selected_band = selected.band;
    rec.score = scores[chosen];

    // Execute: trapezoidal profile over the path, stopping early to replan
    // near the goal, hard-capped by the mission clock.
    const double total_len = plan->length;
    const double exec_len =
        total_len > cfg.replan_distance ? total_len - cfg.replan_distance : total_len;
    TrapezoidalProfile profile(total_len, cfg.v_max, cfg.a_max);
    double exec_time = profile.time_at(exec_len);
    const double budget = cfg.time_limit_s - now;
    bool timed_out = false;
    if (exec_time > budget) {
      exec_time = std::max(0.0, budget);
      timed_out = true;
    }

    double leg_t = 0.0;
    while (true) {
      const double next_scan = leg_t + cfg.scan_interval_s;
      if (next_scan >= exec_time) break;
      leg_t = next_scan;
      const double s = profile.position(leg_t);
      const Vec3 p = path_point_at(plan->points, s);
      const Vec3 tangent = path_tangent_at(plan->points, s);
      const double yaw = std::atan2(tangent.y(), tangent.x());
      log.trajectory.push_back({now + leg_t, p, yaw});
      do_scan(p, yaw, false);
    }

    const double end_s = profile.position(exec_time);
    const Vec3 end_pos = path_point_at(plan->points, end_s);
    const Vec3 end_tangent = path_tangent_at(plan->points, end_s);
    const double end_speed = timed_out || exec_len < total_len ? profile.speed(exec_time) : 0.0;

    now += exec_time;
    log.path_length += end_s;
    state.position = end_pos;
    state.velocity = end_speed * end_tangent;
    state.yaw = std::atan2(end_tangent.y(), end_tangent.x());
    log.trajectory.push_back({now, end_pos, state.yaw});

    if (timed_out) {
      rec.frontier_count = frontiers.frontiers.size();
      rec.c_rem_count = frontiers.c_rem.size();
      rec.map_weight = map.total_weight();
      rec.allocated_blocks = map.allocated_blocks();
      log.rounds.push_back(rec);
      if (hooks && hooks->on_round) hooks->on_round(rec);
      status = MissionStatus::TimeLimit;
      break;
    }

    do_scan(end_pos, state.yaw, false);

    rec.frontier_count = frontiers.frontiers.size();
    rec.c_rem_count = frontiers.c_rem.size();
    rec.map_weight = map.total_weight();
    rec.allocated_blocks = map.allocated_blocks();
    log.rounds.push_back(rec);
    if (hooks && hooks->on_round) hooks->on_round(rec);
  }

  log.status = status;
  log.final_time = now;
  return MissionResult{std::move(log), std::move(map)};
}

}  // namespace nbv
