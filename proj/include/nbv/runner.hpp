#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nbv/mission.hpp"
#include "nbv/quality.hpp"
#include "nbv/scene.hpp"

namespace nbv {

// Fully resolved description of one experiment cell. Exactly one of z_star /
// band endpoints is given on the command line; both forms resolve to the same
// derived config here.
struct RunSpec {
  std::string scene;             // generator name ("room", "corridor-t",
                                 // "scattered[:n]") or a .voxgrid/.obj path
  PlannerKind planner = PlannerKind::QualityGuided;
  double z_star = 0.0;           // resolved target confidence
  double d_star = 4.5;
  double eta = 0.5;
  double alpha = 0.5;
  double beta = 0.5;
  double time_limit_s = 900.0;
  uint64_t seed = 1;
  int repeat = 1;
  std::string out_dir = "runs";
  bool dump_scores = false;
  double sensor_step_deg = 1.0;  // azimuth and elevation resolution
  double scan_interval_s = 1.0;
};

GroundTruthScene build_scene(const std::string& spec);
QualityConfig quality_from_spec(const RunSpec& spec);
MissionConfig mission_from_spec(const RunSpec& spec, uint64_t seed);

struct RunOutcome {
  MetricsReport aggregate;                 // mean over repeats
  std::vector<MetricsReport> per_run;
  std::vector<MissionStatus> statuses;
};

// Executes the spec `repeat` times with seeds seed..seed+repeat-1, writes
// per-run logs plus the aggregate under spec.out_dir, and returns the
// metrics. With write_outputs=false nothing touches the filesystem.
RunOutcome execute_run(const RunSpec& spec, bool write_outputs = true);

// CLI entry points; return a process exit code. Diagnostics go to stderr.
int cmd_run(const RunSpec& spec);

struct SweepSpec {
  std::string scene;
  std::vector<PlannerKind> planners;
  std::vector<std::pair<double, double>> bands;  // [d_lo, d_hi] per cell
  double time_limit_s = 900.0;
  uint64_t seed = 1;
  int repeat = 1;
  std::string out_dir = "sweep";
  double sensor_step_deg = 1.0;
};

int cmd_sweep(const SweepSpec& spec);

}  // namespace nbv
