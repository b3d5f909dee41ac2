#pragma once

#include <iosfwd>
#include <vector>

#include "nbv/frontier.hpp"
#include "nbv/quality.hpp"
#include "nbv/view_generation.hpp"
#include "nbv/voxel_map.hpp"

namespace nbv {

struct RobotState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double yaw = 0.0;
};

struct ScoreBreakdown {
  double j_raw = 0.0;      // quality-weighted visibility sum before normalization
  int visible_count = 0;   // frontiers with an unobstructed ray (|F_v|)
  double j_info = 0.0;
  double j_nav = 0.0;
  double total = 0.0;
};

struct EvaluationConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double eps_velocity = 0.01;  // below this speed the turn penalty is waived
  double eps_distance = 0.25;  // self-distance guard, one voxel
};

// Occlusion-aware visibility of a frontier from a viewpoint: zero if any
// occupied voxel blocks the ray (the frontier's own voxel excluded), else
// e^-u for u unknown voxels crossed.
double visibility(const VoxelMap& map, const Vec3& from, const VoxelKey& frontier);

// Band weight of observing from distance d: full inside the quality interval,
// half below it, decaying with range above it.
double distance_weight(double d, const QualityConfig& q);

// Quality-banded gain of one candidate: sum of h(d) * vis over frontiers in
// sensor range, plus the count of unobstructed frontiers. The batch
// normalizer (max count over all candidates) is applied by score_candidates.
std::pair<double, int> info_gain(const VoxelMap& map, const ViewCandidate& v,
                                 const FrontierSet& frontiers, const QualityConfig& q);

// Heading alignment psi in [0,1]: 1 when the velocity points at the
// candidate, 0 when opposed; 1 for a (near-)stationary robot.
double heading_alignment(const RobotState& state, const Vec3& candidate_position,
                         double eps_velocity);

// Navigation utility: psi times the distance ratio against the nearest
// candidate.
double nav_score(const RobotState& state, const ViewCandidate& v,
                 const std::vector<ViewCandidate>& all, const EvaluationConfig& cfg);

// Full batch scoring with the shared J_I normalizer.
std::vector<ScoreBreakdown> score_candidates(const VoxelMap& map, const RobotState& state,
                                             const std::vector<ViewCandidate>& candidates,
                                             const FrontierSet& frontiers, const QualityConfig& q,
                                             const EvaluationConfig& cfg);

// Index of the candidate with maximal total score; ties go to the candidate
// nearer the robot, then to the lexicographically smaller frontier key.
// Throws on an empty list (exploration is complete or all unreachable).
size_t select_best(const std::vector<ViewCandidate>& candidates,
                   const std::vector<ScoreBreakdown>& scores, const Vec3& robot_position);

// Per-round score log: position, band, raw terms and the selected flag.
void write_scores_csv(const std::vector<ViewCandidate>& candidates,
                      const std::vector<ScoreBreakdown>& scores, size_t selected,
                      std::ostream& out);

}  // namespace nbv
