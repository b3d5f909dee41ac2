#include "nbv/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nbv {

namespace {

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

void put_f32(std::ostream& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

uint32_t get_u32(std::istream& in) {
  char b[4];
  in.read(b, 4);
  uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

float get_f32(std::istream& in) {
  char b[4];
  in.read(b, 4);
  float v;
  std::memcpy(&v, b, 4);
  return v;
}

// Keep the polygon part with poly[axis] >= bound (or <= bound).
std::vector<Vec3> clip_axis(const std::vector<Vec3>& poly, int axis, double bound,
                            bool keep_below) {
  std::vector<Vec3> out;
  const size_t n = poly.size();
  out.reserve(n + 2);
  for (size_t i = 0; i < n; ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % n];
    const double da = keep_below ? bound - a[axis] : a[axis] - bound;
    const double db = keep_below ? bound - b[axis] : b[axis] - bound;
    if (da >= 0.0) out.push_back(a);
    if ((da >= 0.0) != (db >= 0.0)) out.push_back(a + (da / (da - db)) * (b - a));
  }
  return out;
}

std::vector<Vec3> clip_to_box(const Triangle& t, const Vec3& bmin, const Vec3& bmax) {
  std::vector<Vec3> poly{t.a, t.b, t.c};
  for (int axis = 0; axis < 3; ++axis) {
    poly = clip_axis(poly, axis, bmin[axis], false);
    if (poly.empty()) return poly;
    poly = clip_axis(poly, axis, bmax[axis], true);
    if (poly.empty()) return poly;
  }
  return poly;
}

double polygon_area(const std::vector<Vec3>& poly) {
  if (poly.size() < 3) return 0.0;
  Vec3 s = Vec3::Zero();
  for (size_t i = 1; i + 1 < poly.size(); ++i)
    s += (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]);
  return 0.5 * s.norm();
}

void check_alignment(const VoxelMap& map, const GroundTruthScene& gt) {
  if (std::abs(map.voxel_size() - gt.voxel_size()) > 1e-12 ||
      (map.config().origin - gt.origin()).norm() > 1e-9)
    throw std::invalid_argument("map and ground truth grids are not aligned");
}

}  // namespace

GroundTruthScene::GroundTruthScene(const Eigen::Vector3i& dims, double voxel_size,
                                   const Vec3& origin)
    : dims_(dims), voxel_size_(voxel_size), origin_(origin) {
  if (dims_.minCoeff() <= 0) throw std::invalid_argument("scene dimensions must be positive");
  if (voxel_size_ <= 0.0) throw std::invalid_argument("voxel size must be positive");
  occ_.assign(size_t(dims_.x()) * size_t(dims_.y()) * size_t(dims_.z()), 0);
  bounds_ = grid_box();
  start_ = bounds_.center();
}

Aabb GroundTruthScene::grid_box() const {
  return Aabb{origin_, origin_ + voxel_size_ * dims_.cast<double>()};
}

void GroundTruthScene::set_occupied(const VoxelKey& k, bool value) {
  if (!in_grid(k)) throw std::out_of_range("voxel outside the scene grid");
  occ_[flat_index(k)] = value ? 1 : 0;
}

void GroundTruthScene::rebuild_surface() {
  surface_.clear();
  // Neighbors outside the grid count as occupied, so a shell embedded at the
  // grid boundary exposes only its observable side.
  for (int32_t z = 0; z < dims_.z(); ++z)
    for (int32_t y = 0; y < dims_.y(); ++y)
      for (int32_t x = 0; x < dims_.x(); ++x) {
        const VoxelKey k{x, y, z};
        if (!occupied(k)) continue;
        for (const VoxelKey& off : neighbor_offsets_6()) {
          const VoxelKey n{k.x + off.x, k.y + off.y, k.z + off.z};
          if (in_grid(n) && !occupied(n)) {
            surface_.push_back(k);
            break;
          }
        }
      }
}

double GroundTruthScene::truncated_distance(const VoxelKey& k, double tau) const {
  if (occupied(k)) return 0.0;
  const int32_t w = static_cast<int32_t>(std::ceil(tau / voxel_size_));
  double best2 = std::numeric_limits<double>::infinity();
  for (int32_t dz = -w; dz <= w; ++dz)
    for (int32_t dy = -w; dy <= w; ++dy)
      for (int32_t dx = -w; dx <= w; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const VoxelKey n{k.x + dx, k.y + dy, k.z + dz};
        if (!occupied(n)) continue;
        const double d2 = double(dx) * dx + double(dy) * dy + double(dz) * dz;
        best2 = std::min(best2, d2);
      }
  if (!std::isfinite(best2)) return tau;
  return std::min(std::sqrt(best2) * voxel_size_, tau);
}

bool GroundTruthScene::clearance_in_gt(const Vec3& p, double radius) const {
  const VoxelKey lo = key_of(p - Vec3::Constant(radius));
  const VoxelKey hi = key_of(p + Vec3::Constant(radius));
  const double r2 = radius * radius;
  for (int32_t x = lo.x; x <= hi.x; ++x)
    for (int32_t y = lo.y; y <= hi.y; ++y)
      for (int32_t z = lo.z; z <= hi.z; ++z) {
        const VoxelKey k{x, y, z};
        if (!occupied(k)) continue;
        if ((center_of(k) - p).squaredNorm() <= r2) return false;
      }
  return true;
}

void GroundTruthScene::save_voxgrid(std::ostream& out) const {
  out.write("VOXG", 4);
  put_u32(out, 1u);
  put_u32(out, static_cast<uint32_t>(dims_.x()));
  put_u32(out, static_cast<uint32_t>(dims_.y()));
  put_u32(out, static_cast<uint32_t>(dims_.z()));
  put_f32(out, static_cast<float>(voxel_size_));
  for (int i = 0; i < 3; ++i) put_f32(out, static_cast<float>(origin_[i]));
  const size_t n = occ_.size();
  std::vector<uint8_t> packed((n + 7) / 8, 0);
  for (size_t i = 0; i < n; ++i)
    if (occ_[i]) packed[i / 8] |= uint8_t(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
}

void GroundTruthScene::save_voxgrid(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_voxgrid(out);
}

GroundTruthScene GroundTruthScene::load_voxgrid(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "VOXG", 4) != 0)
    throw std::runtime_error("not a voxgrid file (bad magic)");
  const uint32_t version = get_u32(in);
  if (version != 1u) throw std::runtime_error("unsupported voxgrid version");
  Eigen::Vector3i dims;
  for (int i = 0; i < 3; ++i) {
    const uint32_t d = get_u32(in);
    if (d == 0 || d > 4096u) throw std::runtime_error("voxgrid dimensions out of range");
    dims[i] = static_cast<int>(d);
  }
  const double ds = get_f32(in);
  Vec3 origin;
  for (int i = 0; i < 3; ++i) origin[i] = get_f32(in);
  if (!in) throw std::runtime_error("truncated voxgrid header");

  GroundTruthScene scene(dims, ds, origin);
  const size_t n = scene.occ_.size();
  std::vector<uint8_t> packed((n + 7) / 8, 0);
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!in) throw std::runtime_error("truncated voxgrid payload");
  for (size_t i = 0; i < n; ++i)
    scene.occ_[i] = (packed[i / 8] >> (i % 8)) & 1u;
  scene.rebuild_surface();
  return scene;
}

GroundTruthScene GroundTruthScene::load_voxgrid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_voxgrid(in);
}

double triangle_box_overlap_area(const Triangle& t, const Vec3& box_min, const Vec3& box_max) {
  return polygon_area(clip_to_box(t, box_min, box_max));
}

GroundTruthScene GroundTruthScene::voxelize(const std::vector<Triangle>& tris, double voxel_size,
                                            const Vec3& origin, const Eigen::Vector3i& dims) {
  GroundTruthScene scene(dims, voxel_size, origin);
  const double area_eps = 1e-12 * voxel_size * voxel_size;
  const double face_eps = 1e-9 * voxel_size;

  for (const Triangle& t : tris) {
    Vec3 tmin = t.a.cwiseMin(t.b).cwiseMin(t.c);
    Vec3 tmax = t.a.cwiseMax(t.b).cwiseMax(t.c);
    const VoxelKey lo = scene.key_of(tmin);
    const VoxelKey hi = scene.key_of(tmax);
    for (int32_t x = lo.x; x <= hi.x; ++x)
      for (int32_t y = lo.y; y <= hi.y; ++y)
        for (int32_t z = lo.z; z <= hi.z; ++z) {
          const VoxelKey k{x, y, z};
          if (!scene.in_grid(k)) continue;
          const Vec3 bmin = origin + voxel_size * Vec3(x, y, z);
          const Vec3 bmax = bmin + Vec3::Constant(voxel_size);
          const std::vector<Vec3> poly = clip_to_box(t, bmin, bmax);
          if (polygon_area(poly) <= area_eps) continue;
          // A patch flat on a max face belongs to the adjacent voxel, where it
          // sits on the min face.
          bool on_max_face = false;
          for (int axis = 0; axis < 3 && !on_max_face; ++axis) {
            bool flat = true;
            for (const Vec3& p : poly)
              if (std::abs(p[axis] - bmax[axis]) > face_eps) {
                flat = false;
                break;
              }
            on_max_face = flat;
          }
          if (!on_max_face) scene.set_occupied(k, true);
        }
  }
  scene.rebuild_surface();
  return scene;
}

GroundTruthScene GroundTruthScene::load_mesh_obj(std::istream& in, double voxel_size) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw std::runtime_error("malformed vertex line");
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/j", "i//k", "i/j/k"; negative indices count from the end.
        const size_t slash = tok.find('/');
        int i = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
        if (i < 0) i = static_cast<int>(vertices.size()) + i + 1;
        if (i < 1 || i > static_cast<int>(vertices.size()))
          throw std::runtime_error("face index out of range");
        idx.push_back(i - 1);
      }
      for (size_t j = 1; j + 1 < idx.size(); ++j)
        tris.push_back(Triangle{vertices[idx[0]], vertices[idx[j]], vertices[idx[j + 1]]});
    }
  }

  if (tris.empty()) {
    fprintf(stderr, "warning: mesh has no faces, scene is empty\n");
    GroundTruthScene scene(Eigen::Vector3i(1, 1, 1), voxel_size, Vec3::Zero());
    scene.rebuild_surface();
    return scene;
  }

  Vec3 mmin = tris[0].a, mmax = tris[0].a;
  for (const Triangle& t : tris)
    for (const Vec3* p : {&t.a, &t.b, &t.c}) {
      mmin = mmin.cwiseMin(*p);
      mmax = mmax.cwiseMax(*p);
    }
  const Vec3 origin = mmin - Vec3::Constant(voxel_size);
  Eigen::Vector3i dims;
  for (int i = 0; i < 3; ++i)
    dims[i] = static_cast<int>(std::ceil((mmax[i] - origin[i]) / voxel_size)) + 1;
  return voxelize(tris, voxel_size, origin, dims);
}

GroundTruthScene GroundTruthScene::load_mesh_obj(const std::string& path, double voxel_size) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_mesh_obj(in, voxel_size);
}

GroundTruthScene make_room_scene(const RoomParams& p) {
  const double ds = p.voxel_size;
  const int nx = static_cast<int>(std::lround(p.width_m / ds));
  const int ny = static_cast<int>(std::lround(p.length_m / ds));
  const int nz = static_cast<int>(std::lround(p.height_m / ds));
  if (nx < 4 || ny < 4 || nz < 4) throw std::invalid_argument("room too small for its voxel size");

  GroundTruthScene scene(Eigen::Vector3i(nx + 2, ny + 2, nz + 2), ds,
                         Vec3::Constant(-ds));
  for (int32_t z = 0; z < nz + 2; ++z)
    for (int32_t y = 0; y < ny + 2; ++y)
      for (int32_t x = 0; x < nx + 2; ++x) {
        const bool wall = x == 0 || y == 0 || z == 0 || x == nx + 1 || y == ny + 1 || z == nz + 1;
        if (wall) scene.set_occupied(VoxelKey{x, y, z}, true);
      }
  scene.rebuild_surface();
  scene.set_exploration_bounds(Aabb{Vec3::Zero(), Vec3(nx * ds, ny * ds, nz * ds)});
  scene.set_suggested_start(Vec3(nx * ds / 2.0, ny * ds / 2.0, nz * ds / 2.0));
  return scene;
}

GroundTruthScene make_corridor_t_scene(const CorridorTParams& p) {
  const double ds = p.voxel_size;
  const int w = static_cast<int>(std::lround(p.width_m / ds));
  const int h = static_cast<int>(std::lround(p.height_m / ds));
  const int stem = static_cast<int>(std::lround(p.stem_length_m / ds));
  const int arm = static_cast<int>(std::lround(p.arm_length_m / ds));
  if (w < 4 || h < 4 || stem < w || arm < w)
    throw std::invalid_argument("degenerate corridor dimensions");

  // Solid block with the T carved out of it: stem along +x, bar along y.
  const int nx = stem + w + 2;
  const int ny = 2 * arm + w + 2;
  const int nz = h + 2;
  GroundTruthScene scene(Eigen::Vector3i(nx, ny, nz), ds, Vec3::Constant(-ds));
  const int yc_lo = arm + 1;       // stem carve range in y: [yc_lo, yc_lo + w)
  for (int32_t z = 0; z < nz; ++z)
    for (int32_t y = 0; y < ny; ++y)
      for (int32_t x = 0; x < nx; ++x) {
        const bool in_height = z >= 1 && z < 1 + h;
        const bool in_stem = in_height && x >= 1 && x < 1 + stem && y >= yc_lo && y < yc_lo + w;
        const bool in_bar =
            in_height && x >= 1 + stem && x < 1 + stem + w && y >= 1 && y < ny - 1;
        if (!(in_stem || in_bar)) scene.set_occupied(VoxelKey{x, y, z}, true);
      }
  scene.rebuild_surface();
  scene.set_exploration_bounds(
      Aabb{Vec3::Zero(), Vec3((nx - 2) * ds, (ny - 2) * ds, (nz - 2) * ds)});
  // Start near the stem entrance, on the corridor axis.
  scene.set_suggested_start(
      Vec3(1.5 * p.width_m, (arm + static_cast<double>(w) / 2.0) * ds, h * ds / 2.0));
  return scene;
}

GroundTruthScene make_scattered_scene(const ScatteredParams& p) {
  const double ds = p.voxel_size;
  const int n = static_cast<int>(std::lround(p.extent_m / ds));
  const int nz = static_cast<int>(std::lround(p.height_m / ds));
  if (n < 16 || nz < 8) throw std::invalid_argument("scattered scene too small");
  if (p.box_count < 1 || p.box_count > 9) throw std::invalid_argument("box count must be 1..9");

  GroundTruthScene scene(Eigen::Vector3i(n, n, nz), ds, Vec3::Zero());
  for (int32_t y = 0; y < n; ++y)
    for (int32_t x = 0; x < n; ++x) scene.set_occupied(VoxelKey{x, y, 0}, true);

  // One box per cell of a coarse layout grid, jittered; keeps boxes disjoint
  // and clear of the center start position.
  std::mt19937_64 rng(p.layout_seed);
  const int cells = static_cast<int>(std::ceil(std::sqrt(double(p.box_count))));
  const double cell = p.extent_m / cells;
  int placed = 0;
  for (int cy = 0; cy < cells && placed < p.box_count; ++cy)
    for (int cx = 0; cx < cells && placed < p.box_count; ++cx) {
      std::uniform_real_distribution<double> size_d(1.5, 3.0);
      std::uniform_real_distribution<double> jitter(-0.15 * cell, 0.15 * cell);
      const double side = size_d(rng);
      const double height = size_d(rng);
      const double cx_m = (cx + 0.5) * cell + jitter(rng);
      const double cy_m = (cy + 0.5) * cell + jitter(rng);
      const int x0 = std::max(1, static_cast<int>(std::lround((cx_m - side / 2) / ds)));
      const int y0 = std::max(1, static_cast<int>(std::lround((cy_m - side / 2) / ds)));
      const int x1 = std::min(n - 2, x0 + static_cast<int>(std::lround(side / ds)));
      const int y1 = std::min(n - 2, y0 + static_cast<int>(std::lround(side / ds)));
      const int z1 = std::min(nz - 2, 1 + static_cast<int>(std::lround(height / ds)));
      for (int32_t z = 1; z < z1; ++z)
        for (int32_t y = y0; y < y1; ++y)
          for (int32_t x = x0; x < x1; ++x) scene.set_occupied(VoxelKey{x, y, z}, true);
      ++placed;
    }

  scene.rebuild_surface();
  scene.set_exploration_bounds(Aabb{Vec3::Zero(), Vec3(n * ds, n * ds, nz * ds)});
  scene.set_suggested_start(Vec3(p.extent_m / 2.0, p.extent_m / 2.0, 1.75));
  return scene;
}

std::pair<int64_t, double> coverage(const VoxelMap& map, const GroundTruthScene& gt) {
  check_alignment(map, gt);
  const double diag = map.voxel_size() * std::sqrt(3.0);
  const double tau = map.truncation();
  int64_t covered = 0;
  for (const VoxelKey& k : gt.surface_keys()) {
    const TsdfVoxel* v = map.find(k);
    if (!v || v->weight <= 0.0) continue;
    if (std::abs(v->distance - gt.truncated_distance(k, tau)) < diag) ++covered;
  }
  const double ratio =
      gt.surface_keys().empty() ? 0.0 : double(covered) / double(gt.surface_keys().size());
  return {covered, ratio};
}

double map_error_pct(const VoxelMap& map, const GroundTruthScene& gt) {
  check_alignment(map, gt);
  if (gt.surface_keys().empty()) return 0.0;
  const double tau = map.truncation();
  double sum = 0.0;
  for (const VoxelKey& k : gt.surface_keys()) {
    const TsdfVoxel* v = map.find(k);
    if (!v || v->weight <= 0.0) {
      sum += tau;  // unknown counts as the largest representable error
      continue;
    }
    sum += std::min(std::abs(v->distance - gt.truncated_distance(k, tau)), tau);
  }
  return 100.0 * sum / (double(gt.surface_keys().size()) * tau);
}

double quality_shortfall_pct(const VoxelMap& map, const GroundTruthScene& gt,
                             double probe_distance) {
  check_alignment(map, gt);
  if (probe_distance <= 0.0) throw std::invalid_argument("probe distance must be positive");
  if (gt.surface_keys().empty()) return 0.0;
  const double target = 1.0 / (probe_distance * probe_distance);
  double deficit = 0.0;
  for (const VoxelKey& k : gt.surface_keys()) {
    const TsdfVoxel* v = map.find(k);
    const double w = v ? v->weight : 0.0;
    deficit += std::max(0.0, target - std::min(w, target));
  }
  return 100.0 * deficit / (double(gt.surface_keys().size()) * target);
}

}  // namespace nbv
