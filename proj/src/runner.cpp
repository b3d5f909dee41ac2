#include "nbv/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nbv {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<int> kProbeDistances = {1, 2, 4, 5, 8, 9};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

json spec_to_json(const RunSpec& spec) {
  json j;
  j["scene"] = spec.scene;
  j["planner"] = planner_name(spec.planner);
  j["z_star"] = spec.z_star;
  j["d_star"] = spec.d_star;
  j["eta"] = spec.eta;
  j["alpha"] = spec.alpha;
  j["beta"] = spec.beta;
  j["time_limit_s"] = spec.time_limit_s;
  j["seed"] = spec.seed;
  j["repeat"] = spec.repeat;
  j["sensor_step_deg"] = spec.sensor_step_deg;
  j["scan_interval_s"] = spec.scan_interval_s;
  return j;
}

json metrics_to_json(const MetricsReport& m, bool include_wall_time) {
  json j;
  j["covered_count"] = m.covered_count;
  j["coverage_ratio"] = m.coverage_ratio;
  j["path_length_m"] = m.path_length_m;
  j["mean_map_error_pct"] = m.mean_map_error_pct;
  j["z_post"] = m.z_post;
  json probes;
  for (const auto& [d, pct] : m.shortfall_pct) probes["d" + std::to_string(d)] = pct;
  j["distance_to_z_star_pct"] = probes;
  // Wall time is measured, not simulated; it never goes into the aggregate so
  // identical seeds reproduce identical bytes.
  if (include_wall_time) j["wall_time_s"] = m.wall_time_s;
  return j;
}

void write_trajectory_csv(const MissionLog& log, const std::string& path) {
  std::ofstream out(path);
  out << "t,x,y,z,yaw\n";
  for (const TrajectorySample& s : log.trajectory)
    out << s.t << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ','
        << s.yaw << '\n';
}

json mission_to_json(const MissionLog& log, const MetricsReport& metrics) {
  json j;
  j["status"] =
      log.status == MissionStatus::CompleteByExhaustion ? "complete-by-exhaustion" : "time-limit";
  j["final_sim_time_s"] = log.final_time;
  j["path_length_m"] = log.path_length;
  j["scan_total"] = log.scan_total;
  j["start"] = {log.start.x(), log.start.y(), log.start.z()};
  j["metrics"] = metrics_to_json(metrics, true);
  json rounds = json::array();
  for (const RoundRecord& r : log.rounds) {
    json jr;
    jr["round"] = r.round;
    jr["sim_time"] = r.sim_time;
    jr["position"] = {r.position.x(), r.position.y(), r.position.z()};
    jr["selected_position"] = {r.selected_position.x(), r.selected_position.y(),
                               r.selected_position.z()};
    jr["selected_band"] = band_name(r.selected_band);
    jr["score_total"] = r.score.total;
    jr["score_info"] = r.score.j_info;
    jr["score_nav"] = r.score.j_nav;
    jr["frontier_count"] = r.frontier_count;
    jr["c_rem_count"] = r.c_rem_count;
    jr["map_weight"] = r.map_weight;
    rounds.push_back(std::move(jr));
  }
  j["rounds"] = std::move(rounds);
  return j;
}

}  // namespace

GroundTruthScene build_scene(const std::string& spec) {
  const std::vector<std::string> parts = split(spec, ':');
  const std::string& kind = parts[0];
  if (kind == "room") {
    RoomParams p;
    if (parts.size() > 1) {
      const auto dims = split(parts[1], 'x');
      if (dims.size() != 3) throw std::invalid_argument("room wants WxLxH in meters");
      p.width_m = std::stod(dims[0]);
      p.length_m = std::stod(dims[1]);
      p.height_m = std::stod(dims[2]);
    }
    return make_room_scene(p);
  }
  if (kind == "corridor-t") {
    CorridorTParams p;
    if (parts.size() > 1) p.width_m = std::stod(parts[1]);
    return make_corridor_t_scene(p);
  }
  if (kind == "scattered") {
    ScatteredParams p;
    if (parts.size() > 1) p.box_count = std::stoi(parts[1]);
    return make_scattered_scene(p);
  }
  if (spec.size() > 8 && spec.substr(spec.size() - 8) == ".voxgrid")
    return GroundTruthScene::load_voxgrid(spec);
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".obj")
    return GroundTruthScene::load_mesh_obj(spec, 0.25);
  throw std::invalid_argument("unknown scene '" + spec +
                              "' (expected room/corridor-t/scattered or a .voxgrid/.obj path)");
}

QualityConfig quality_from_spec(const RunSpec& spec) {
  SensorModel sensor;
  QualityConfig q = make_quality_config(spec.z_star, spec.eta, sensor.r_min, sensor.r_max);
  return q;
}

MissionConfig mission_from_spec(const RunSpec& spec, uint64_t seed) {
  MissionConfig m;
  m.planner = spec.planner;
  m.time_limit_s = spec.time_limit_s;
  m.alpha = spec.alpha;
  m.beta = spec.beta;
  m.seed = seed;
  m.scan_interval_s = spec.scan_interval_s;
  m.sensor.az_step = deg_to_rad(spec.sensor_step_deg);
  m.sensor.el_step = deg_to_rad(spec.sensor_step_deg);
  return m;
}

RunOutcome execute_run(const RunSpec& spec, bool write_outputs) {
  const GroundTruthScene scene = build_scene(spec.scene);
  const QualityConfig q = quality_from_spec(spec);

  fs::path dir(spec.out_dir);
  if (write_outputs) fs::create_directories(dir);

  RunOutcome outcome;
  for (int i = 0; i < spec.repeat; ++i) {
    const uint64_t seed = spec.seed + static_cast<uint64_t>(i);
    const MissionConfig mc = mission_from_spec(spec, seed);

    const fs::path run_dir = dir / ("run_" + std::to_string(seed));
    MissionHooks hooks;
    if (write_outputs && spec.dump_scores) {
      fs::create_directories(run_dir);
      hooks.on_scores = [&](int round, const std::vector<ViewCandidate>& cands,
                            const std::vector<ScoreBreakdown>& scores, size_t chosen) {
        std::ofstream out(run_dir / ("scores_round_" + std::to_string(round) + ".csv"));
        write_scores_csv(cands, scores, chosen, out);
      };
    }

    const auto t0 = std::chrono::steady_clock::now();
    MissionResult result = run_mission(scene, mc, q, &hooks);
    const auto t1 = std::chrono::steady_clock::now();

    MetricsReport m;
    auto [count, ratio] = coverage(result.map, scene);
    m.covered_count = count;
    m.coverage_ratio = ratio;
    m.path_length_m = result.log.path_length;
    m.mean_map_error_pct = map_error_pct(result.map, scene);
    m.z_post = quality_Z_post(result.map, scene);
    for (int d : kProbeDistances)
      m.shortfall_pct[d] = quality_shortfall_pct(result.map, scene, double(d));
    m.wall_time_s = std::chrono::duration<double>(t1 - t0).count();

    if (write_outputs) {
      fs::create_directories(run_dir);
      json j;
      j["spec"] = spec_to_json(spec);
      j["seed"] = seed;
      j.update(mission_to_json(result.log, m));
      std::ofstream(run_dir / "mission.json") << j.dump(2) << '\n';
      write_trajectory_csv(result.log, (run_dir / "trajectory.csv").string());
    }

    outcome.per_run.push_back(m);
    outcome.statuses.push_back(result.log.status);
  }

  MetricsReport& agg = outcome.aggregate;
  const double n = double(outcome.per_run.size());
  for (const MetricsReport& m : outcome.per_run) {
    agg.covered_count += m.covered_count;
    agg.coverage_ratio += m.coverage_ratio / n;
    agg.path_length_m += m.path_length_m / n;
    agg.mean_map_error_pct += m.mean_map_error_pct / n;
    agg.z_post += m.z_post / n;
    for (const auto& [d, pct] : m.shortfall_pct) agg.shortfall_pct[d] += pct / n;
    agg.wall_time_s += m.wall_time_s;
  }
  agg.covered_count = static_cast<int64_t>(std::llround(double(agg.covered_count) / n));

  if (write_outputs) {
    json j;
    j["spec"] = spec_to_json(spec);
    j["runs"] = spec.repeat;
    j["aggregate"] = metrics_to_json(agg, false);
    json per = json::array();
    for (const MetricsReport& m : outcome.per_run) per.push_back(metrics_to_json(m, false));
    j["per_run"] = std::move(per);
    std::ofstream(dir / "aggregate.json") << j.dump(2) << '\n';

    std::ofstream csv(dir / "aggregate.csv");
    csv << "planner,scene,d_star,coverage_ratio,covered_count,path_length_m,map_error_pct,z_post";
    for (int d : kProbeDistances) csv << ",shortfall_d" << d;
    csv << '\n';
    csv << planner_name(spec.planner) << ',' << spec.scene << ',' << spec.d_star << ','
        << agg.coverage_ratio << ',' << agg.covered_count << ',' << agg.path_length_m << ','
        << agg.mean_map_error_pct << ',' << agg.z_post;
    for (int d : kProbeDistances) csv << ',' << agg.shortfall_pct[d];
    csv << '\n';
  }
  return outcome;
}

int cmd_run(const RunSpec& spec) {
  try {
    const RunOutcome outcome = execute_run(spec, true);
    std::printf("%s on %s: coverage %.1f%%, path %.1f m, map error %.2f%%, z_post %.3f\n",
                planner_name(spec.planner), spec.scene.c_str(),
                100.0 * outcome.aggregate.coverage_ratio, outcome.aggregate.path_length_m,
                outcome.aggregate.mean_map_error_pct, outcome.aggregate.z_post);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

int cmd_sweep(const SweepSpec& sweep) {
  if (sweep.planners.empty() || sweep.bands.empty()) {
    std::fprintf(stderr, "error: sweep matrix is empty\n");
    return 1;
  }
  fs::path dir(sweep.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create %s\n", dir.string().c_str());
    return 2;
  }

  json table = json::array();
  std::ofstream csv(dir / "sweep.csv");
  csv << "planner,band,coverage_ratio,covered_count,path_length_m,map_error_pct,z_post";
  for (int d : kProbeDistances) csv << ",shortfall_d" << d;
  csv << ",status\n";

  bool any_failed = false;
  for (PlannerKind planner : sweep.planners) {
    for (const auto& [d_lo, d_hi] : sweep.bands) {
      RunSpec spec;
      spec.scene = sweep.scene;
      spec.planner = planner;
      const QualityConfig q = quality_config_from_band(d_lo, d_hi);
      spec.z_star = q.z_star;
      spec.d_star = q.d_star;
      spec.eta = q.eta;
      spec.time_limit_s = sweep.time_limit_s;
      spec.seed = sweep.seed;
      spec.repeat = sweep.repeat;
      spec.sensor_step_deg = sweep.sensor_step_deg;
      std::ostringstream cell;
      cell << planner_name(planner) << "_d" << d_lo << "-" << d_hi;
      spec.out_dir = (dir / cell.str()).string();

      json row;
      row["planner"] = planner_name(planner);
      row["band"] = {d_lo, d_hi};
      csv << planner_name(planner) << ',' << d_lo << '-' << d_hi;
      try {
        const RunOutcome outcome = execute_run(spec, true);
        row["metrics"] = metrics_to_json(outcome.aggregate, false);
        row["status"] = "ok";
        csv << ',' << outcome.aggregate.coverage_ratio << ',' << outcome.aggregate.covered_count
            << ',' << outcome.aggregate.path_length_m << ','
            << outcome.aggregate.mean_map_error_pct << ',' << outcome.aggregate.z_post;
        for (int d : kProbeDistances) csv << ',' << outcome.aggregate.shortfall_pct[d];
        csv << ",ok\n";
      } catch (const std::exception& e) {
        any_failed = true;
        row["status"] = std::string("failed: ") + e.what();
        for (int i = 0; i < 11; ++i) csv << ',';
        csv << ",failed\n";
        std::fprintf(stderr, "cell %s failed: %s\n", cell.str().c_str(), e.what());
      }
      table.push_back(std::move(row));
    }
  }

  json j;
  j["scene"] = sweep.scene;
  j["time_limit_s"] = sweep.time_limit_s;
  j["repeat"] = sweep.repeat;
  j["cells"] = std::move(table);
  std::ofstream(dir / "sweep.json") << j.dump(2) << '\n';
  return any_failed ? 3 : 0;
}

}  // namespace nbv
