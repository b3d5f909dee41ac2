#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nbv/quality.hpp"
#include "nbv/runner.hpp"

namespace {

// "a:b" -> band endpoints in meters.
std::optional<std::pair<double, double>> parse_band(const std::string& s) {
  const size_t colon = s.find(':');
  if (colon == std::string::npos) return std::nullopt;
  try {
    const double lo = std::stod(s.substr(0, colon));
    const double hi = std::stod(s.substr(colon + 1));
    if (lo <= 0.0 || hi <= lo) return std::nullopt;
    return std::make_pair(lo, hi);
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headless quality-guided next-best-view exploration simulator"};
  app.require_subcommand(1);

  // --- run ---
  nbv::RunSpec spec;
  std::string planner_str = "ours";
  double z_star_flag = -1.0;
  std::string band_str;
  double d_point = -1.0;

  CLI::App* run = app.add_subcommand("run", "run one mission configuration");
  run->add_option("--scene", spec.scene,
                  "scene: room[:WxLxH], corridor-t[:width], scattered[:boxes], "
                  "or a .voxgrid/.obj path")
      ->required();
  run->add_option("--planner", planner_str, "ours | closest-frontier | frontier-count");
  run->add_option("--z-star", z_star_flag, "target per-voxel confidence in (0,1]");
  run->add_option("--d-star", band_str, "optimal-distance band, meters, as LO:HI");
  run->add_option("--d-star-point-m", d_point, "optimal distance as a single value, meters");
  run->add_option("--time-limit-s", spec.time_limit_s, "mission sim-time budget");
  run->add_option("--seed", spec.seed, "base random seed");
  run->add_option("--repeat", spec.repeat, "number of repeats (seeds seed..seed+n-1)");
  run->add_option("--alpha", spec.alpha, "information-gain weight");
  run->add_option("--beta", spec.beta, "navigation weight");
  run->add_option("--out", spec.out_dir, "output directory");
  run->add_option("--sensor-step-deg", spec.sensor_step_deg, "ray grid resolution, degrees");
  run->add_option("--scan-interval-s", spec.scan_interval_s, "en-route scan cadence");
  run->add_flag("--dump-scores", spec.dump_scores, "write per-round candidate score CSVs");

  // --- sweep ---
  nbv::SweepSpec sweep;
  std::vector<std::string> sweep_planners = {"ours", "closest-frontier", "frontier-count"};
  std::vector<std::string> sweep_bands = {"4:5"};

  CLI::App* sw = app.add_subcommand("sweep", "run a planner x quality-band matrix");
  sw->add_option("--scene", sweep.scene, "scene as in run")->required();
  sw->add_option("--planners", sweep_planners, "planner list")->delimiter(',');
  sw->add_option("--bands", sweep_bands, "band list, each LO:HI in meters")->delimiter(',');
  sw->add_option("--time-limit-s", sweep.time_limit_s, "sim-time budget per mission");
  sw->add_option("--seed", sweep.seed, "base random seed");
  sw->add_option("--repeat", sweep.repeat, "repeats per cell");
  sw->add_option("--out", sweep.out_dir, "output directory");
  sw->add_option("--sensor-step-deg", sweep.sensor_step_deg, "ray grid resolution, degrees");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    const auto planner = nbv::planner_from_name(planner_str);
    if (!planner) {
      std::fprintf(stderr, "error: unknown planner '%s'\n", planner_str.c_str());
      return 2;
    }
    spec.planner = *planner;

    const int given = int(z_star_flag > 0.0) + int(!band_str.empty()) + int(d_point > 0.0);
    if (given != 1) {
      std::fprintf(stderr, "error: give exactly one of --z-star, --d-star, --d-star-point-m\n");
      return 2;
    }
    try {
      nbv::QualityConfig q;
      if (z_star_flag > 0.0) {
        q = nbv::make_quality_config(z_star_flag);
      } else if (d_point > 0.0) {
        q = nbv::make_quality_config(1.0 / (d_point * d_point));
      } else {
        const auto band = parse_band(band_str);
        if (!band) {
          std::fprintf(stderr, "error: bad band '%s', expected LO:HI\n", band_str.c_str());
          return 2;
        }
        q = nbv::quality_config_from_band(band->first, band->second);
      }
      spec.z_star = q.z_star;
      spec.d_star = q.d_star;
      spec.eta = q.eta;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
    return nbv::cmd_run(spec);
  }

  // sweep
  sweep.planners.clear();
  for (const std::string& name : sweep_planners) {
    const auto planner = nbv::planner_from_name(name);
    if (!planner) {
      std::fprintf(stderr, "error: unknown planner '%s'\n", name.c_str());
      return 2;
    }
    sweep.planners.push_back(*planner);
  }
  sweep.bands.clear();
  for (const std::string& b : sweep_bands) {
    const auto band = parse_band(b);
    if (!band) {
      std::fprintf(stderr, "error: bad band '%s', expected LO:HI\n", b.c_str());
      return 2;
    }
    sweep.bands.push_back(*band);
  }
  return nbv::cmd_sweep(sweep);
}
