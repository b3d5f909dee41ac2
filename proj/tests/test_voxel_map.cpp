#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "nbv/voxel_map.hpp"
#include "oracles.hpp"

using namespace nbv;

namespace {

MapConfig small_config(double extent = 8.0) {
  MapConfig cfg;
  cfg.bounds = Aabb{Vec3::Constant(-extent), Vec3::Constant(extent)};
  return cfg;
}

// Sensor centered in voxel (0,0,0): voxel centers along +x sit at exact
// multiples of the voxel size from it.
Pose centered_sensor() { return Pose{Vec3::Constant(0.125), 0.0}; }

HitPoint hit_at(const Pose& sensor, const Vec3& dir, double range, HitPoint::Kind kind) {
  return HitPoint{sensor.position + range * dir, kind, dir};
}

}  // namespace

TEST_CASE("classification follows the weight/distance rule") {
  VoxelMap map(small_config());
  CHECK(map.classify(TsdfVoxel{0.3, 0.0}) == VoxelState::Unknown);
  CHECK(map.classify(TsdfVoxel{-0.7, 0.0}) == VoxelState::Unknown);
  CHECK(map.classify(TsdfVoxel{0.5, 0.5}) == VoxelState::Empty);
  CHECK(map.classify(TsdfVoxel{0.1, 0.5}) == VoxelState::Occupied);
  // boundary distance == voxel size counts as occupied
  CHECK(map.classify(TsdfVoxel{0.25, 1.0}) == VoxelState::Occupied);
}

TEST_CASE("exactly one state holds for random voxels") {
  VoxelMap map(small_config());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> wd(0.0, 3.0), dd(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    TsdfVoxel v{dd(rng), i % 5 == 0 ? 0.0 : wd(rng)};
    int states = 0;
    states += map.classify(v) == VoxelState::Empty;
    states += map.classify(v) == VoxelState::Occupied;
    states += map.classify(v) == VoxelState::Unknown;
    CHECK(states == 1);
  }
}

TEST_CASE("neighbor sets have the right cardinality and content") {
  const VoxelKey o{0, 0, 0};
  CHECK(neighbors(o, 6).size() == 6);
  CHECK(neighbors(o, 18).size() == 18);
  CHECK(neighbors(o, 26).size() == 26);
  CHECK_THROWS_AS(neighbors(o, 7), std::invalid_argument);

  std::set<VoxelKey> n6;
  for (const auto& k : neighbors(o, 6)) n6.insert(k);
  CHECK(n6 == std::set<VoxelKey>{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}});

  std::set<VoxelKey> n26;
  for (const auto& k : neighbors(o, 26)) n26.insert(k);
  CHECK(n26.size() == 26);
  CHECK(n26.count(o) == 0);
  for (int32_t x = -1; x <= 1; ++x)
    for (int32_t y = -1; y <= 1; ++y)
      for (int32_t z = -1; z <= 1; ++z)
        if (!(x == 0 && y == 0 && z == 0)) CHECK(n26.count(VoxelKey{x, y, z}) == 1);
}

TEST_CASE("neighborhoods are symmetric") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int32_t> coord(-20, 20);
  for (int conn : {6, 18, 26})
    for (int i = 0; i < 50; ++i) {
      const VoxelKey a{coord(rng), coord(rng), coord(rng)};
      for (const VoxelKey& b : neighbors(a, conn)) {
        const auto back = neighbors(b, conn);
        CHECK(std::count(back.begin(), back.end(), a) == 1);
      }
    }
}

TEST_CASE("first observation at 2 m deposits weight 1/4") {
  VoxelMap map(small_config());
  const Pose sensor = centered_sensor();
  // voxel (8,0,0) center is exactly 2 m down the +x axis
  map.integrate_scan(sensor, {hit_at(sensor, Vec3::UnitX(), 2.3, HitPoint::Kind::SurfaceHit)});
  const TsdfVoxel v = map.voxel(VoxelKey{8, 0, 0});
  CHECK(v.weight == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v.distance == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("two equal-weight observations average their distances") {
  VoxelMap map(small_config());
  const Pose sensor = centered_sensor();
  // voxel (4,0,0) center is exactly 1 m away: each observation has weight 1
  map.integrate_scan(sensor, {hit_at(sensor, Vec3::UnitX(), 1.1, HitPoint::Kind::SurfaceHit)});
  map.integrate_scan(sensor, {hit_at(sensor, Vec3::UnitX(), 1.3, HitPoint::Kind::SurfaceHit)});
  const TsdfVoxel v = map.voxel(VoxelKey{4, 0, 0});
  CHECK(v.weight == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v.distance == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("a max-range miss carves every traversed voxel empty") {
  VoxelMap map(small_config());
  const Pose sensor = centered_sensor();
  const Vec3 dir = Vec3(0.57, 0.31, 0.19).normalized();  // generic direction
  map.integrate_scan(sensor, {hit_at(sensor, dir, 10.0, HitPoint::Kind::MaxRangeMiss)});

  const Vec3 end = sensor.position + 10.0 * dir;
  const auto expected =
      testing::segment_voxels(sensor.position, end, map.voxel_size(), map.config().origin);
  CHECK(expected.size() > 30);
  for (const VoxelKey& k : expected) {
    CAPTURE(k.x);
    CHECK(map.state(k) == VoxelState::Empty);
    CHECK(map.voxel(k).distance == doctest::Approx(map.truncation()));
  }
}

TEST_CASE("surface hits write the projective distance band") {
  VoxelMap map(small_config());
  const Pose sensor = centered_sensor();
  map.integrate_scan(sensor, {hit_at(sensor, Vec3::UnitX(), 3.0, HitPoint::Kind::SurfaceHit)});

  // in front of the hit: positive distances, clamped to the truncation
  CHECK(map.voxel(VoxelKey{2, 0, 0}).distance == doctest::Approx(map.truncation()));
  CHECK(map.voxel(VoxelKey{11, 0, 0}).distance == doctest::Approx(0.25));  // 2.75 m along
  // at the hit: distance crosses zero
  CHECK(map.voxel(VoxelKey{12, 0, 0}).distance == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(map.state(VoxelKey{12, 0, 0}) == VoxelState::Occupied);
  // behind the hit: negative, still observed
  CHECK(map.voxel(VoxelKey{14, 0, 0}).distance == doctest::Approx(-0.5));
  // well behind the truncation band: untouched
  CHECK(map.voxel(VoxelKey{18, 0, 0}).weight == 0.0);
}

TEST_CASE("integration rejects out-of-envelope returns") {
  VoxelMap map(small_config());
  const Pose sensor = centered_sensor();
  CHECK_THROWS_AS(map.integrate_scan(
                      sensor, {hit_at(sensor, Vec3::UnitX(), 0.2, HitPoint::Kind::SurfaceHit)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(map.integrate_scan(
                      sensor, {hit_at(sensor, Vec3::UnitX(), 11.0, HitPoint::Kind::SurfaceHit)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(map.integrate_scan(
                      sensor, {hit_at(sensor, Vec3::UnitX(), 5.0, HitPoint::Kind::MaxRangeMiss)}),
                  std::invalid_argument);
  const Pose outside{Vec3::Constant(50.0), 0.0};
  CHECK_THROWS_AS(map.integrate_scan(outside, {}), std::invalid_argument);
}

TEST_CASE("weights never decrease and match the scalar running average") {
  VoxelMap map(small_config());
  const Pose sensor = centered_sensor();
  testing::WeightedAverage expect;
  double last_weight = 0.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> range(1.5, 2.5);
  const VoxelKey target{4, 0, 0};  // center exactly 1 m out, weight 1 per observation
  for (int i = 0; i < 40; ++i) {
    const double r = range(rng);
    map.integrate_scan(sensor, {hit_at(sensor, Vec3::UnitX(), r, HitPoint::Kind::SurfaceHit)});
    expect.add(1.0, std::clamp(r - 1.0, -map.truncation(), map.truncation()));
    const TsdfVoxel v = map.voxel(target);
    CHECK(v.weight >= last_weight);
    last_weight = v.weight;
    CHECK(v.distance == doctest::Approx(expect.value).epsilon(1e-6));
    CHECK(v.weight == doctest::Approx(expect.weight).epsilon(1e-9));
  }
}

TEST_CASE("identical scan sequences produce bit-identical maps") {
  auto run = [] {
    VoxelMap map(small_config());
    const Pose sensor = centered_sensor();
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 5; ++s) {
      std::vector<HitPoint> hits;
      for (int r = 0; r < 50; ++r) {
        const Vec3 dir = Vec3(u(rng), u(rng), u(rng)).normalized();
        const double range = 1.0 + 4.0 * (u(rng) * 0.5 + 0.5);
        hits.push_back(hit_at(centered_sensor(), dir, range, HitPoint::Kind::SurfaceHit));
      }
      map.integrate_scan(sensor, hits);
    }
    std::vector<std::tuple<VoxelKey, double, double>> state;
    map.for_each_allocated([&](const VoxelKey& k, const TsdfVoxel& v) {
      state.emplace_back(k, v.distance, v.weight);
    });
    return state;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(std::get<0>(a[i]) == std::get<0>(b[i]));
    CHECK(std::get<1>(a[i]) == std::get<1>(b[i]));  // exact
    CHECK(std::get<2>(a[i]) == std::get<2>(b[i]));
  }
}

TEST_CASE("clearance treats unknown as unsafe") {
  VoxelMap map(small_config());
  // a 8^3-voxel neighborhood of known-free space around the origin
  for (int32_t x = -8; x <= 8; ++x)
    for (int32_t y = -8; y <= 8; ++y)
      for (int32_t z = -8; z <= 8; ++z) map.set_voxel(VoxelKey{x, y, z}, 1.0, 0.5);

  SUBCASE("occupied voxel far away does not block") {
    map.set_voxel(VoxelKey{12, 0, 0}, 0.0, 1.0);  // ~3 m from the origin center
    CHECK(map.clearance_ok(Vec3::Constant(0.125), 1.0));
  }
  SUBCASE("coincident occupied center blocks") {
    map.set_voxel(VoxelKey{0, 0, 0}, 0.0, 1.0);
    CHECK_FALSE(map.clearance_ok(Vec3::Constant(0.125), 1.0));
  }
  SUBCASE("surrounding unknown blocks") {
    CHECK_FALSE(map.clearance_ok(Vec3(3.0, 3.0, 3.0), 1.0));  // outside the freed block
  }
  SUBCASE("exhaustive agreement on a 8^3 grid") {
    map.set_voxel(VoxelKey{3, 1, 0}, 0.1, 2.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(u(rng), u(rng), u(rng));
      const double radius = 0.3 + 0.7 * (u(rng) * (1.0 / 3.0) + 0.5);
      bool expect = true;
      const VoxelKey lo = map.key_of(p - Vec3::Constant(radius));
      const VoxelKey hi = map.key_of(p + Vec3::Constant(radius));
      for (int32_t x = lo.x; x <= hi.x && expect; ++x)
        for (int32_t y = lo.y; y <= hi.y && expect; ++y)
          for (int32_t z = lo.z; z <= hi.z && expect; ++z) {
            const VoxelKey k{x, y, z};
            if ((map.center_of(k) - p).norm() <= radius &&
                map.state(k) != VoxelState::Empty)
              expect = false;
          }
      CHECK(map.clearance_ok(p, radius) == expect);
    }
  }
}

TEST_CASE("binary dump carries header and observed records") {
  VoxelMap map(small_config());
  map.set_voxel(VoxelKey{1, 2, 3}, 0.5, 1.5);
  map.set_voxel(VoxelKey{-1, 0, 2}, -0.25, 0.75);
  std::ostringstream out(std::ios::binary);
  map.dump_binary(out);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 16 + 2 * 20);
  CHECK(bytes.substr(0, 4) == "TSDF");
  uint32_t version, count;
  float ds;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&ds, bytes.data() + 8, 4);
  std::memcpy(&count, bytes.data() + 12, 4);
  CHECK(version == 1);
  CHECK(ds == doctest::Approx(0.25));
  CHECK(count == 2);
  int32_t x;
  float d, w;
  std::memcpy(&x, bytes.data() + 16, 4);
  std::memcpy(&d, bytes.data() + 16 + 12, 4);
  std::memcpy(&w, bytes.data() + 16 + 16, 4);
  CHECK(x == -1);  // sorted order: (-1,0,2) first
  CHECK(d == doctest::Approx(-0.25));
  CHECK(w == doctest::Approx(0.75));
}

TEST_CASE("DDA traversal matches the slab-clipping oracle on generic rays") {
  const double ds = 0.25;
  const Vec3 origin = Vec3::Zero();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 300; ++i) {
    const Vec3 a(u(rng), u(rng), u(rng));
    const Vec3 b(u(rng), u(rng), u(rng));
    if ((b - a).norm() < 0.2) continue;
    std::vector<VoxelKey> walked;
    walk_ray(a, b, ds, origin, [&](const VoxelKey& k, double) {
      walked.push_back(k);
      return true;
    });
    auto expected = testing::segment_voxels(a, b, ds, origin);
    std::sort(walked.begin(), walked.end());
    std::sort(expected.begin(), expected.end());
    CAPTURE(i);
    CHECK(walked == expected);
  }
}
