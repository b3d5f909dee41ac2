#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nbv/quality.hpp"
#include "nbv/scene.hpp"
#include "nbv/sensor_sim.hpp"
#include "nbv/view_evaluation.hpp"
#include "nbv/view_generation.hpp"
#include "nbv/voxel_map.hpp"

namespace nbv {

// Rest-to-rest 1D velocity profile under symmetric acceleration limits.
class TrapezoidalProfile {
 public:
  TrapezoidalProfile(double length, double v_max, double a_max);

  double length() const { return length_; }
  double duration() const { return duration_; }
  double position(double t) const;
  double speed(double t) const;
  // Time at which the profile reaches arc position s.
  double time_at(double s) const;

 private:
  double length_;
  double v_max_;    // peak speed actually reached
  double a_max_;
  double t_ramp_;   // acceleration (and deceleration) time
  double t_cruise_;
  double duration_;
};

enum class PlannerKind : uint8_t { QualityGuided, ClosestFrontier, FrontierCount };

const char* planner_name(PlannerKind k);
std::optional<PlannerKind> planner_from_name(const std::string& name);

struct MissionConfig {
  PlannerKind planner = PlannerKind::QualityGuided;
  double time_limit_s = 900.0;
  double v_max = 4.5;
  double a_max = 4.8;
  double robot_radius = 1.0;
  double replan_distance = 1.5;   // replan when this close to the goal
  double scan_interval_s = 1.0;   // en-route scan cadence
  double scan_duration_s = 0.0;   // sim-time cost per scan
  double alpha = 0.5;
  double beta = 0.5;
  uint64_t seed = 0;
  bool jitter_start = true;       // seed-dependent start offset
  Vec3 start = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());  // NaN: scene default
  SensorModel sensor;
  GenerationConfig generation;
};

struct PathPlan {
  std::vector<Vec3> points;
  double length = 0.0;
};

struct RoundRecord {
  int round = 0;
  double sim_time = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 selected_position = Vec3::Zero();
  VoxelKey selected_frontier;
  Band selected_band = Band::Optimal;
  ScoreBreakdown score;
  size_t frontier_count = 0;
  size_t c_rem_count = 0;
  double map_weight = 0.0;
  size_t allocated_blocks = 0;
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

enum class MissionStatus : uint8_t { TimeLimit, CompleteByExhaustion };

struct MissionLog {
  std::vector<RoundRecord> rounds;
  std::vector<TrajectorySample> trajectory;
  MissionStatus status = MissionStatus::TimeLimit;
  double final_time = 0.0;
  double path_length = 0.0;
  Vec3 start = Vec3::Zero();
  int scan_total = 0;
};

struct MissionResult {
  MissionLog log;
  VoxelMap map;
};

// Instrumentation for tests and score logging; the planning callbacks run
// while the map still holds the planning-time state.
struct MissionHooks {
  std::function<void(const VoxelMap&, const std::vector<Vec3>&)> on_planned_leg;
  std::function<void(const RoundRecord&)> on_round;
  std::function<void(int round, const std::vector<ViewCandidate>&,
                     const std::vector<ScoreBreakdown>&, size_t selected)>
      on_scores;
};

// Straight shot if every sample along it (half-voxel step) has clearance,
// otherwise shortest 26-connected grid path over known-free space inflated by
// the radius, with greedy shortcutting. nullopt when unreachable.
std::optional<PathPlan> plan_path(const VoxelMap& map, const Vec3& from, const Vec3& to,
                                  double radius);

// Heuristic baselines sharing the quality-guided pipeline; only selection
// differs. ClosestFrontier: nearest candidate. FrontierCount: most visible
// frontiers. Ties resolved like select_best.
size_t baseline_select(const std::vector<ViewCandidate>& candidates,
                       const std::vector<ScoreBreakdown>& scores, PlannerKind kind,
                       const Vec3& robot_position);

// The sense -> map -> plan -> move loop. Runs until the time limit or until
// no reachable frontier remains.
MissionResult run_mission(const GroundTruthScene& scene, const MissionConfig& cfg,
                          const QualityConfig& q, const MissionHooks* hooks = nullptr);

}  // namespace nbv
