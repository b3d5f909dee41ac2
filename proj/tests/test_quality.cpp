#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "nbv/quality.hpp"
#include "oracles.hpp"

using namespace nbv;

namespace {

MapConfig domain(const Vec3& lo, const Vec3& hi) {
  MapConfig cfg;
  cfg.bounds = Aabb{lo, hi};
  return cfg;
}

}  // namespace

TEST_CASE("optimal distance inverts the confidence model") {
  CHECK(optimal_distance(0.04, 0.42, 10.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(optimal_distance(1.0, 0.42, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
  // sqrt(1/0.0025) = 20, clamped to the sensor maximum
  CHECK(optimal_distance(0.0025, 0.42, 10.0) == doctest::Approx(10.0));
  // a null target admits any distance: the maximum range
  CHECK(optimal_distance(0.0, 0.42, 10.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(optimal_distance(-0.1, 0.42, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_distance(1.5, 0.42, 10.0), std::invalid_argument);
}

TEST_CASE("band-form and target-form configs agree through the model") {
  const QualityConfig a = quality_config_from_band(4.0, 5.0);
  CHECK(a.d_star == doctest::Approx(4.5));
  CHECK(a.eta == doctest::Approx(0.5));
  CHECK(a.z_star == doctest::Approx(1.0 / 20.25));
  const QualityConfig b = make_quality_config(0.04);
  CHECK(b.d_star == doctest::Approx(5.0));
  CHECK(b.w_max == doctest::Approx(0.04));
}

TEST_CASE("quality gates on remaining reachable frontiers") {
  VoxelMap map(domain(Vec3::Zero(), Vec3::Constant(0.5)));  // 2^3 voxel domain
  for (int32_t x = 0; x < 2; ++x)
    for (int32_t y = 0; y < 2; ++y)
      for (int32_t z = 0; z < 2; ++z) map.set_voxel(VoxelKey{x, y, z}, 1.0, 0.5);

  FrontierSet none;
  CHECK(quality_Z(map, none) == doctest::Approx(0.5).epsilon(1e-12));

  FrontierSet some;
  some.frontiers.emplace(VoxelKey{0, 0, 0}, Frontier{VoxelKey{0, 0, 0}, std::nullopt});
  CHECK(quality_Z(map, some) == 0.0);
  CHECK(quality_Z_sat(map, some, 0.04) == 0.0);

  // unreachable-only frontiers do not gate
  FrontierSet only_crem;
  only_crem.c_rem.insert(VoxelKey{0, 0, 0});
  CHECK(quality_Z(map, only_crem) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("half observed domain with marks accounted averages to one half") {
  VoxelMap map(domain(Vec3::Zero(), Vec3(0.5, 0.25, 0.25)));  // 2 voxels
  map.set_voxel(VoxelKey{0, 0, 0}, 1.0, 1.0);
  FrontierSet set;
  set.c_rem.insert(VoxelKey{1, 0, 0});
  const double expected = (1.0 + 0.0) / 2.0;  // direct summation
  CHECK(quality_Z(map, set) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("saturated quality caps each voxel") {
  VoxelMap map(domain(Vec3::Zero(), Vec3(0.5, 0.25, 0.25)));
  FrontierSet none;

  SUBCASE("all above the cap") {
    map.set_voxel(VoxelKey{0, 0, 0}, 1.0, 10.0);
    map.set_voxel(VoxelKey{1, 0, 0}, 1.0, 10.0);
    CHECK(quality_Z_sat(map, none, 0.04) == doctest::Approx(0.04).epsilon(1e-12));
  }
  SUBCASE("all below the cap") {
    map.set_voxel(VoxelKey{0, 0, 0}, 1.0, 0.01);
    map.set_voxel(VoxelKey{1, 0, 0}, 1.0, 0.01);
    CHECK(quality_Z_sat(map, none, 0.04) == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("mixed weights") {
    map.set_voxel(VoxelKey{0, 0, 0}, 1.0, 0.1);
    map.set_voxel(VoxelKey{1, 0, 0}, 1.0, 0.01);
    CHECK(quality_Z_sat(map, none, 0.04) ==
          doctest::Approx((0.04 + 0.01) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("saturation bounds and permutation invariance") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> wd(0.0, 0.2);
  FrontierSet none;

  VoxelMap map(domain(Vec3::Zero(), Vec3::Constant(1.0)));  // 4^3 domain
  std::vector<double> weights;
  for (int i = 0; i < 64; ++i) weights.push_back(wd(rng));

  auto build = [&](const std::vector<double>& w) {
    VoxelMap m(domain(Vec3::Zero(), Vec3::Constant(1.0)));
    int i = 0;
    for (int32_t x = 0; x < 4; ++x)
      for (int32_t y = 0; y < 4; ++y)
        for (int32_t z = 0; z < 4; ++z) m.set_voxel(VoxelKey{x, y, z}, 1.0, w[i++]);
    return m;
  };

  const VoxelMap a = build(weights);
  CHECK(quality_Z_sat(a, none, 0.04) <= quality_Z(a, none) + 1e-15);

  std::vector<double> capped = weights;
  for (double& w : capped) w = std::min(w, 0.04);
  const VoxelMap c = build(capped);
  // equality iff every weight is at or below the cap
  CHECK(quality_Z_sat(c, none, 0.04) == doctest::Approx(quality_Z(c, none)).epsilon(1e-12));

  std::shuffle(weights.begin(), weights.end(), rng);
  const VoxelMap b = build(weights);
  CHECK(quality_Z_sat(a, none, 0.04) == doctest::Approx(quality_Z_sat(b, none, 0.04)).epsilon(1e-12));
}

TEST_CASE("a-posteriori quality normalizes by the true surface count") {
  // ground truth: a flat 4x4 slab, every voxel is surface
  GroundTruthScene gt(Eigen::Vector3i(6, 6, 4), 0.25, Vec3::Zero());
  for (int32_t x = 1; x <= 4; ++x)
    for (int32_t y = 1; y <= 4; ++y) gt.set_occupied(VoxelKey{x, y, 1}, true);
  gt.rebuild_surface();
  REQUIRE(gt.surface_keys().size() == 16);

  MapConfig mc = domain(Vec3::Zero(), Vec3(1.5, 1.5, 1.0));
  SUBCASE("empty reconstruction scores zero") {
    VoxelMap map(mc);
    CHECK(quality_Z_post(map, gt) == 0.0);
  }
  SUBCASE("perfect unit-weight reconstruction scores one") {
    VoxelMap map(mc);
    for (const VoxelKey& k : gt.surface_keys()) map.set_voxel(k, 0.0, 1.0);
    CHECK(quality_Z_post(map, gt) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("half the surface at the cap weight") {
    VoxelMap map(mc);
    int placed = 0;
    for (const VoxelKey& k : gt.surface_keys()) {
      if (placed >= 8) break;
      map.set_voxel(k, 0.0, 0.04);
      ++placed;
    }
    CHECK(quality_Z_post(map, gt) == doctest::Approx(0.02).epsilon(1e-12));
  }
  SUBCASE("grid mismatch is rejected") {
    MapConfig other = mc;
    other.voxel_size = 0.5;
    VoxelMap map(other);
    CHECK_THROWS_AS(quality_Z_post(map, gt), std::invalid_argument);
  }
}

TEST_CASE("one observation at the optimal distance deposits the target weight") {
  for (double z_star : {0.01, 0.04, 0.25, 1.0}) {
    CAPTURE(z_star);
    const QualityConfig q = make_quality_config(z_star);
    MapConfig mc = domain(Vec3::Constant(-1.0), Vec3::Constant(12.0));
    VoxelMap map(mc);
    const Pose sensor{Vec3::Constant(0.125), 0.0};
    map.integrate_scan(sensor,
                       {HitPoint{sensor.position + 10.0 * Vec3::UnitX(),
                                 HitPoint::Kind::MaxRangeMiss, Vec3::UnitX()}});
    // the voxel whose center sits exactly d* down the ray
    const int32_t ix = static_cast<int32_t>(std::lround(q.d_star / 0.25));
    const TsdfVoxel v = map.voxel(VoxelKey{ix, 0, 0});
    REQUIRE(v.weight > 0.0);
    CHECK(v.weight == doctest::Approx(z_star).epsilon(1e-6));
  }
}
