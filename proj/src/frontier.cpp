#include "nbv/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

namespace nbv {

bool is_frontier_voxel(const VoxelMap& map, const VoxelKey& k) {
  if (!map.in_bounds(k)) return false;
  if (map.state(k) != VoxelState::Empty) return false;
  bool has_unknown = false;
  for (const VoxelKey& off : neighbor_offsets_6()) {
    if (map.state(VoxelKey{k.x + off.x, k.y + off.y, k.z + off.z}) == VoxelState::Unknown) {
      has_unknown = true;
      break;
    }
  }
  if (!has_unknown) return false;
  for (const VoxelKey& off : neighbor_offsets_18()) {
    if (map.state(VoxelKey{k.x + off.x, k.y + off.y, k.z + off.z}) == VoxelState::Occupied)
      return true;
  }
  return false;
}

std::optional<Vec3> surface_normal(const VoxelMap& map, const VoxelKey& k) {
  Vec3 sum = Vec3::Zero();
  for (const VoxelKey& off : neighbor_offsets_26()) {
    const VoxelKey n{k.x + off.x, k.y + off.y, k.z + off.z};
    const TsdfVoxel v = map.voxel(n);
    if (v.weight <= 0.0) continue;  // unknown neighbors contribute nothing
    const double sign = map.classify(v) == VoxelState::Occupied ? -1.0 : 1.0;
    const Vec3 dir = Vec3(off.x, off.y, off.z).normalized();
    sum += sign * v.weight * dir;
  }
  const double norm = sum.norm();
  if (norm < 1e-9) return std::nullopt;
  return sum / norm;
}

FrontierSet extract_frontiers(const VoxelMap& map, const FrontierSet* previous) {
  FrontierSet out;
  map.for_each_allocated([&](const VoxelKey& k, const TsdfVoxel& v) {
    if (v.weight <= 0.0) return;
    if (!is_frontier_voxel(map, k)) return;
    if (previous && previous->c_rem.count(k)) {
      out.c_rem.insert(k);
      return;
    }
    out.frontiers.emplace(k, Frontier{k, surface_normal(map, k)});
  });
  return out;
}

void update_frontiers(FrontierSet& set, const VoxelMap& map,
                      const std::vector<VoxelKey>& class_changed) {
  // Re-observation anywhere in an unreachable frontier's neighborhood resets
  // the mark, so changed surroundings earn it another generation attempt.
  const uint32_t current = map.scan_count();
  std::vector<VoxelKey> reset;
  for (const VoxelKey& k : set.c_rem) {
    bool touched = map.voxel(k).last_scan == current;
    if (!touched)
      for (const VoxelKey& off : neighbor_offsets_18()) {
        const TsdfVoxel* v = map.find(VoxelKey{k.x + off.x, k.y + off.y, k.z + off.z});
        if (v && v->weight > 0.0 && v->last_scan == current) {
          touched = true;
          break;
        }
      }
    if (touched) reset.push_back(k);
  }
  for (const VoxelKey& k : reset) set.c_rem.erase(k);

  // The frontier status of a voxel depends on its own class and those of its
  // 18-neighborhood, so dilate the changed set by one ring.
  std::unordered_set<VoxelKey, VoxelKeyHash> retest;
  retest.reserve(class_changed.size() * 4 + reset.size());
  for (const VoxelKey& c : class_changed) {
    if (map.in_bounds(c)) retest.insert(c);
    for (const VoxelKey& off : neighbor_offsets_18()) {
      const VoxelKey n{c.x + off.x, c.y + off.y, c.z + off.z};
      if (map.in_bounds(n)) retest.insert(n);
    }
  }
  for (const VoxelKey& k : reset) retest.insert(k);

  std::vector<VoxelKey> ordered(retest.begin(), retest.end());
  std::sort(ordered.begin(), ordered.end());
  for (const VoxelKey& k : ordered) {
    if (is_frontier_voxel(map, k) && !set.c_rem.count(k))
      set.frontiers.insert_or_assign(k, Frontier{k, surface_normal(map, k)});
    else
      set.frontiers.erase(k);
  }
}

bool mark_unreachable(FrontierSet& set, const VoxelKey& key) {
  if (set.c_rem.count(key)) return true;
  auto it = set.frontiers.find(key);
  if (it == set.frontiers.end()) {
    std::fprintf(stderr, "warning: mark_unreachable on a non-frontier voxel (%d,%d,%d)\n", key.x,
                 key.y, key.z);
    return false;
  }
  set.frontiers.erase(it);
  set.c_rem.insert(key);
  return true;
}

void write_frontiers_csv(const FrontierSet& set, std::ostream& out) {
  out << "ix,iy,iz,nx,ny,nz,reachable\n";
  for (const auto& [k, f] : set.frontiers) {
    const Vec3 n = f.normal.value_or(Vec3::Zero());
    out << k.x << ',' << k.y << ',' << k.z << ',' << n.x() << ',' << n.y() << ',' << n.z()
        << ",1\n";
  }
  for (const VoxelKey& k : set.c_rem)
    out << k.x << ',' << k.y << ',' << k.z << ",0,0,0,0\n";
}

}  // namespace nbv
