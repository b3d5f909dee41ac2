#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "nbv/frontier.hpp"
#include "nbv/sensor_sim.hpp"
#include "oracles.hpp"

using namespace nbv;

namespace {

MapConfig box_config(double extent = 4.0) {
  MapConfig cfg;
  cfg.bounds = Aabb{Vec3::Zero(), Vec3::Constant(extent)};
  return cfg;
}

void fill_empty(VoxelMap& map, const VoxelKey& lo, const VoxelKey& hi, double w = 1.0) {
  for (int32_t x = lo.x; x < hi.x; ++x)
    for (int32_t y = lo.y; y < hi.y; ++y)
      for (int32_t z = lo.z; z < hi.z; ++z)
        map.set_voxel(VoxelKey{x, y, z}, map.truncation(), w);
}

}  // namespace

TEST_CASE("a fully unknown map has no frontiers") {
  VoxelMap map(box_config());
  const FrontierSet set = extract_frontiers(map);
  CHECK(set.frontiers.empty());
  CHECK(set.c_rem.empty());
}

TEST_CASE("a fully observed closed interior has no frontiers") {
  VoxelMap map(box_config());
  // occupied shell around an empty interior, everything observed
  for (int32_t x = 0; x < 16; ++x)
    for (int32_t y = 0; y < 16; ++y)
      for (int32_t z = 0; z < 16; ++z) {
        const bool shell = x == 0 || y == 0 || z == 0 || x == 15 || y == 15 || z == 15;
        map.set_voxel(VoxelKey{x, y, z}, shell ? 0.0 : map.truncation(), 1.0);
      }
  CHECK(extract_frontiers(map).frontiers.empty());
}

TEST_CASE("half-observed wall yields exactly the boundary ring") {
  VoxelMap map(box_config());
  // wall plane at x=8; free space in front of it, but only the y<8 half has
  // been observed; y>=8 stays unknown
  for (int32_t y = 0; y < 8; ++y)
    for (int32_t z = 0; z < 16; ++z) {
      map.set_voxel(VoxelKey{8, y, z}, 0.0, 1.0);
      for (int32_t x = 2; x < 8; ++x) map.set_voxel(VoxelKey{x, y, z}, map.truncation(), 1.0);
    }

  const FrontierSet set = extract_frontiers(map);
  const auto oracle = testing::extract_ise_brute(map, VoxelKey{0, 0, 0}, VoxelKey{16, 16, 16});

  std::set<VoxelKey> got;
  for (const auto& [k, f] : set.frontiers) got.insert(k);
  CHECK(got == oracle);
  // Only the empty column touching the wall can satisfy the occupied-18
  // condition; its frontier rows are the ones facing unobserved space: the
  // y=7 observation boundary (16), the y=0 grid edge (16), and the z edges of
  // the rows between (6 rows x 2).
  CHECK(set.frontiers.size() == 44);
  for (const auto& [k, f] : set.frontiers) {
    CHECK(k.x == 7);
    CHECK(is_frontier_voxel(map, k));
  }
  for (int32_t z = 0; z < 16; ++z) CHECK(got.count(VoxelKey{7, 7, z}) == 1);
}

TEST_CASE("extraction completeness against brute force on random maps") {
  std::mt19937 rng(41);
  std::uniform_int_distribution<int32_t> coord(0, 15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    VoxelMap map(box_config());
    for (int i = 0; i < 600; ++i) {
      const VoxelKey k{coord(rng), coord(rng), coord(rng)};
      const double r = u(rng);
      if (r < 0.5)
        map.set_voxel(k, map.truncation(), 1.0);  // empty
      else if (r < 0.8)
        map.set_voxel(k, 0.0, 1.0);  // occupied
    }
    const FrontierSet set = extract_frontiers(map);
    const auto oracle = testing::extract_ise_brute(map, VoxelKey{-1, -1, -1}, VoxelKey{17, 17, 17});
    std::set<VoxelKey> got;
    for (const auto& [k, f] : set.frontiers) got.insert(k);
    CAPTURE(trial);
    CHECK(got == oracle);
  }
}

TEST_CASE("normals point away from the occupied side") {
  VoxelMap map(box_config());

  SUBCASE("single occupied neighbor") {
    map.set_voxel(VoxelKey{8, 8, 8}, map.truncation(), 1.0);
    map.set_voxel(VoxelKey{7, 8, 8}, 0.0, 1.0);
    const auto n = surface_normal(map, VoxelKey{8, 8, 8});
    REQUIRE(n.has_value());
    CHECK(n->x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n->y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(n->z() == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("symmetric occupied pair cancels") {
    map.set_voxel(VoxelKey{8, 8, 8}, map.truncation(), 1.0);
    map.set_voxel(VoxelKey{7, 8, 8}, 0.0, 1.0);
    map.set_voxel(VoxelKey{9, 8, 8}, 0.0, 1.0);
    CHECK_FALSE(surface_normal(map, VoxelKey{8, 8, 8}).has_value());
  }

  SUBCASE("half-observed floor points up within 15 degrees") {
    // occupied floor below, empty above on the observed half, unknown lateral
    for (int32_t x = 6; x <= 10; ++x)
      for (int32_t y = 6; y <= 8; ++y) {
        map.set_voxel(VoxelKey{x, y, 4}, 0.0, 1.0);
        for (int32_t z = 5; z <= 7; ++z) map.set_voxel(VoxelKey{x, y, z}, map.truncation(), 1.0);
      }
    const VoxelKey k{8, 8, 5};  // on the observation boundary (y=9+ unknown)
    REQUIRE(is_frontier_voxel(map, k));
    const auto n = surface_normal(map, k);
    REQUIRE(n.has_value());
    const double angle = std::acos(std::clamp(n->dot(Vec3::UnitZ()), -1.0, 1.0));
    CHECK(rad_to_deg(angle) < 15.0);

    // anti-alignment: negative dot with the direction toward the occupied side
    CHECK(n->dot(-Vec3::UnitZ()) < 0.0);
  }
}

TEST_CASE("incremental updates match a full re-extraction") {
  const RoomParams params{6.0, 6.0, 3.0, 0.25};
  const GroundTruthScene scene = make_room_scene(params);
  MapConfig mc;
  mc.origin = scene.origin();
  mc.bounds = scene.exploration_bounds();
  VoxelMap map(mc);

  SensorModel sensor;
  sensor.az_step = deg_to_rad(3.0);
  sensor.el_step = deg_to_rad(3.0);

  FrontierSet incremental;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ux(1.2, 4.8), uz(1.0, 2.0);
  for (int i = 0; i < 6; ++i) {
    const Pose pose{Vec3(ux(rng), ux(rng), uz(rng)), 0.0};
    const auto changed = map.integrate_scan(pose, scan(scene, pose, sensor));
    update_frontiers(incremental, map, changed);

    FrontierSet full = extract_frontiers(map, &incremental);
    CAPTURE(i);
    REQUIRE(full.frontiers.size() == incremental.frontiers.size());
    for (const auto& [k, f] : full.frontiers) CHECK(incremental.frontiers.count(k) == 1);
  }
}

TEST_CASE("unreachable marks move, reset and stay disjoint") {
  VoxelMap map(box_config());
  map.set_voxel(VoxelKey{8, 8, 8}, map.truncation(), 1.0);
  map.set_voxel(VoxelKey{7, 8, 8}, 0.0, 1.0);
  FrontierSet set = extract_frontiers(map);
  REQUIRE(set.frontiers.count(VoxelKey{8, 8, 8}) == 1);

  SUBCASE("marking moves the key and is idempotent") {
    CHECK(mark_unreachable(set, VoxelKey{8, 8, 8}));
    CHECK(set.frontiers.empty());
    CHECK(set.c_rem.count(VoxelKey{8, 8, 8}) == 1);
    CHECK(mark_unreachable(set, VoxelKey{8, 8, 8}));  // idempotent
    CHECK(set.c_rem.size() == 1);
  }

  SUBCASE("marking an absent key warns and returns false") {
    CHECK_FALSE(mark_unreachable(set, VoxelKey{0, 0, 0}));
  }

  SUBCASE("re-extraction honors previous marks") {
    mark_unreachable(set, VoxelKey{8, 8, 8});
    const FrontierSet again = extract_frontiers(map, &set);
    CHECK(again.frontiers.empty());
    CHECK(again.c_rem.count(VoxelKey{8, 8, 8}) == 1);
  }

  SUBCASE("re-observing the neighborhood clears the mark") {
    mark_unreachable(set, VoxelKey{8, 8, 8});
    // a real scan whose rays cross the marked voxel's neighborhood
    const Pose sensor{Vec3(0.6, 2.125, 2.125), 0.0};
    const Vec3 dir = (map.center_of(VoxelKey{7, 8, 8}) - sensor.position).normalized();
    const auto changed = map.integrate_scan(
        sensor, {HitPoint{map.center_of(VoxelKey{7, 8, 8}), HitPoint::Kind::SurfaceHit, dir}});
    update_frontiers(set, map, changed);
    CHECK(set.c_rem.empty());
    CHECK(set.frontiers.count(VoxelKey{8, 8, 8}) == 1);
  }

  SUBCASE("disjointness after random operation sequences") {
    std::mt19937 rng(13);
    for (int i = 0; i < 50; ++i) {
      const VoxelKey k{int32_t(rng() % 16), int32_t(rng() % 16), int32_t(rng() % 16)};
      if (rng() % 2)
        mark_unreachable(set, k);
      else
        map.set_voxel(k, rng() % 2 ? 0.0 : map.truncation(), 1.0);
      if (i % 10 == 0) set = extract_frontiers(map, &set);
      for (const auto& [fk, f] : set.frontiers) CHECK(set.c_rem.count(fk) == 0);
    }
  }
}

TEST_CASE("frontier CSV dump lists reachable and unreachable rows") {
  VoxelMap map(box_config());
  map.set_voxel(VoxelKey{8, 8, 8}, map.truncation(), 1.0);
  map.set_voxel(VoxelKey{7, 8, 8}, 0.0, 1.0);
  FrontierSet set = extract_frontiers(map);
  set.c_rem.insert(VoxelKey{1, 2, 3});
  std::ostringstream out;
  write_frontiers_csv(set, out);
  const std::string text = out.str();
  CHECK(text.find("ix,iy,iz,nx,ny,nz,reachable") == 0);
  CHECK(text.find("8,8,8,1,") != std::string::npos);
  CHECK(text.find("1,2,3,0,0,0,0") != std::string::npos);
}
