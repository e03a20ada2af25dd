#include "twsar/mesh.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace twsar {

void validate_params(const WallParams& params) {
  if (params.epsilon_r < 1.0) throw std::invalid_argument("wall epsilon_r must be >= 1");
  if (params.sigma < 0.0) throw std::invalid_argument("wall sigma must be >= 0");
  if (params.thickness <= 0.0) throw std::invalid_argument("wall thickness must be > 0");
  if (params.lengths.minCoeff() <= 0.0) throw std::invalid_argument("wall arm lengths must be > 0");
  if (params.height <= 0.0) throw std::invalid_argument("wall height must be > 0");
  if (params.thickness >= params.lengths.minCoeff())
    throw std::invalid_argument("wall thickness must be smaller than both arm lengths");
}

namespace {

// Deduplicating vertex table keyed on quantized coordinates, so faces meeting
// along shared edges reuse identical vertices and the result is watertight.
class VertexTable {
 public:
  int add(const Vec3& p) {
    const std::array<std::int64_t, 3> key = {quant(p.x()), quant(p.y()), quant(p.z())};
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(points_.size());
    index_.emplace(key, id);
    points_.push_back(p);
    return id;
  }

  MatX3 matrix() const {
    MatX3 m(points_.size(), 3);
    for (std::size_t i = 0; i < points_.size(); ++i) m.row(i) = points_[i].transpose();
    return m;
  }

 private:
  static std::int64_t quant(double x) { return std::llround(x * 1e9); }

  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::size_t h = 1469598103934665603ull;
      for (auto v : k) {
        h ^= static_cast<std::size_t>(v);
        h *= 1099511628211ull;
      }
      return h;
    }
  };

  std::unordered_map<std::array<std::int64_t, 3>, int, KeyHash> index_;
  std::vector<Vec3> points_;
};

struct MeshBuilder {
  VertexTable table;
  std::vector<std::array<int, 3>> tris;

  void add_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    tris.push_back({table.add(a), table.add(b), table.add(c)});
  }

  // Ruled quad grid between corners p00 -> p10 (first direction, nu cells) and
  // p00 -> p01 (second direction, nv cells); triangle winding follows the
  // corner order, so callers pick corners to make normals point outward.
  void add_quad_grid(const Vec3& p00, const Vec3& p10, const Vec3& p11, const Vec3& p01,
                     int nu, int nv) {
    auto at = [&](int i, int j) {
      const double u = static_cast<double>(i) / nu;
      const double v = static_cast<double>(j) / nv;
      return ((1 - u) * (1 - v)) * p00 + (u * (1 - v)) * p10 + (u * v) * p11 + ((1 - u) * v) * p01;
    };
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        add_triangle(at(i, j), at(i + 1, j), at(i + 1, j + 1));
        add_triangle(at(i, j), at(i + 1, j + 1), at(i, j + 1));
      }
  }

  SurfaceMesh finish() const {
    SurfaceMesh mesh;
    mesh.vertices = table.matrix();
    mesh.triangles.resize(tris.size(), 3);
    for (std::size_t t = 0; t < tris.size(); ++t)
      for (int c = 0; c < 3; ++c) mesh.triangles(t, c) = tris[t][c];
    return mesh;
  }
};

int divisions(double length, double target_edge) {
  return std::max(1, static_cast<int>(std::ceil(length / target_edge)));
}

}  // namespace

double corner_wall_volume(const WallParams& p) {
  const double t = p.thickness;
  const double footprint = p.lengths.x() * t + (p.lengths.y() - t) * t;
  return footprint * p.height;
}

SurfaceMesh build_corner_wall(const WallParams& params, double target_edge) {
  validate_params(params);
  if (target_edge <= 0.0) throw std::invalid_argument("target_edge must be > 0");

  const double t = params.thickness;
  const double l1 = params.lengths.x();
  const double l2 = params.lengths.y();
  const double z0 = -0.5 * params.height;
  const double z1 = 0.5 * params.height;
  const Vec2 o = params.origin_offset;

  auto pt = [&](double x, double y, double z) { return Vec3(o.x() + x, o.y() + y, z); };

  // Footprint split into three axis-aligned rectangles sharing full edges:
  //   A = [0,t]x[0,t], B = [t,l1]x[0,t], C = [0,t]x[t,l2].
  const int nt = divisions(t, target_edge);
  const int nb = divisions(l1 - t, target_edge);
  const int nc = divisions(l2 - t, target_edge);
  const int nh = divisions(params.height, target_edge);

  MeshBuilder mb;

  struct Rect {
    double x0, y0, x1, y1;
    int nu, nv;
  };
  const Rect rects[] = {{0, 0, t, t, nt, nt}, {t, 0, l1, t, nb, nt}, {0, t, t, l2, nt, nc}};
  for (const Rect& r : rects) {
    // top (+z): CCW seen from above
    mb.add_quad_grid(pt(r.x0, r.y0, z1), pt(r.x1, r.y0, z1), pt(r.x1, r.y1, z1),
                     pt(r.x0, r.y1, z1), r.nu, r.nv);
    // bottom (-z): reversed
    mb.add_quad_grid(pt(r.x0, r.y0, z0), pt(r.x0, r.y1, z0), pt(r.x1, r.y1, z0),
                     pt(r.x1, r.y0, z0), r.nv, r.nu);
  }

  // Side walls follow the CCW footprint boundary, split so subdivision counts
  // match the top/bottom rectangle grids along every shared edge.
  struct Seg {
    double x0, y0, x1, y1;
    int n;
  };
  const Seg boundary[] = {
      {0, 0, t, 0, nt},    {t, 0, l1, 0, nb},   {l1, 0, l1, t, nt}, {l1, t, t, t, nb},
      {t, t, t, l2, nc},   {t, l2, 0, l2, nt},  {0, l2, 0, t, nc},  {0, t, 0, 0, nt},
  };
  for (const Seg& s : boundary) {
    // CCW footprint + upward extrusion: quad (start@z0, end@z0, end@z1, start@z1)
    // gives the outward normal.
    mb.add_quad_grid(pt(s.x0, s.y0, z0), pt(s.x1, s.y1, z0), pt(s.x1, s.y1, z1),
                     pt(s.x0, s.y0, z1), s.n, nh);
  }

  return mb.finish();
}

SurfaceMesh build_sphere_mesh(double radius, const Vec3& center, double target_edge) {
  if (radius <= 0.0) throw std::invalid_argument("sphere radius must be > 0");
  if (target_edge <= 0.0) throw std::invalid_argument("target_edge must be > 0");

  // Icosahedron, then midpoint subdivision with projection back to the sphere.
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  auto max_edge = [&]() {
    double m = 0.0;
    for (const auto& f : faces)
      for (int c = 0; c < 3; ++c)
        m = std::max(m, (verts[f[c]] - verts[f[(c + 1) % 3]]).norm() * radius);
    return m;
  };

  while (max_edge() > target_edge) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
    if (faces.size() > 600000) throw std::runtime_error("sphere refinement exploded");
  }

  SurfaceMesh mesh;
  mesh.vertices.resize(verts.size(), 3);
  for (std::size_t i = 0; i < verts.size(); ++i)
    mesh.vertices.row(i) = (center + radius * verts[i]).transpose();
  mesh.triangles.resize(faces.size(), 3);
  for (std::size_t t = 0; t < faces.size(); ++t)
    for (int c = 0; c < 3; ++c) mesh.triangles(t, c) = faces[t][c];
  return mesh;
}

double mesh_signed_volume(const SurfaceMesh& mesh) {
  double vol = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.triangle_vertex(t, 0);
    const Vec3 b = mesh.triangle_vertex(t, 1);
    const Vec3 c = mesh.triangle_vertex(t, 2);
    vol += a.dot(b.cross(c)) / 6.0;
  }
  return vol;
}

double mesh_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.triangle_vertex(t, 0);
    const Vec3 b = mesh.triangle_vertex(t, 1);
    const Vec3 c = mesh.triangle_vertex(t, 2);
    area += 0.5 * ((b - a).cross(c - a)).norm();
  }
  return area;
}

double mesh_max_edge(const SurfaceMesh& mesh) {
  double m = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t)
    for (int c = 0; c < 3; ++c)
      m = std::max(m, (mesh.triangle_vertex(t, c) - mesh.triangle_vertex(t, (c + 1) % 3)).norm());
  return m;
}

MeshReport mesh_validate(const SurfaceMesh& mesh) {
  MeshReport rep;
  rep.signed_volume = mesh_signed_volume(mesh);
  rep.max_edge_length = mesh_max_edge(mesh);

  rep.min_triangle_area = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.triangle_vertex(t, 0);
    const Vec3 b = mesh.triangle_vertex(t, 1);
    const Vec3 c = mesh.triangle_vertex(t, 2);
    rep.min_triangle_area = std::min(rep.min_triangle_area, 0.5 * ((b - a).cross(c - a)).norm());
  }
  if (mesh.triangle_count() == 0) rep.min_triangle_area = 0.0;

  // Watertight: every undirected edge borders exactly two triangles.
  // Oriented: the two traversals run in opposite directions and the enclosed
  // volume is positive.
  std::map<std::pair<int, int>, int> directed;
  std::map<std::pair<int, int>, int> undirected;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t)
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c);
      const int b = mesh.triangles(t, (c + 1) % 3);
      directed[{a, b}] += 1;
      undirected[{std::min(a, b), std::max(a, b)}] += 1;
    }
  rep.watertight = true;
  for (const auto& [edge, count] : undirected)
    if (count != 2) rep.watertight = false;
  rep.oriented = rep.watertight;
  for (const auto& [edge, count] : directed)
    if (count != 1) rep.oriented = false;
  if (rep.signed_volume <= 0.0) rep.oriented = false;
  return rep;
}

bool point_inside(const SurfaceMesh& mesh, const Vec3& p) {
  // Sum of signed solid angles: ~4*pi inside, ~0 outside.
  double omega = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.triangle_vertex(t, 0) - p;
    const Vec3 b = mesh.triangle_vertex(t, 1) - p;
    const Vec3 c = mesh.triangle_vertex(t, 2) - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    omega += 2.0 * std::atan2(num, den);
  }
  return omega > 2.0 * pi;
}

double point_triangle_distance(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  Vec3 q;
  if (d1 <= 0 && d2 <= 0) {
    q = a;
  } else {
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d3 >= 0 && d4 <= d3) {
      q = b;
    } else if (d6 >= 0 && d5 <= d6) {
      q = c;
    } else {
      const double vc = d1 * d4 - d3 * d2;
      const double vb = d5 * d2 - d1 * d6;
      const double va = d3 * d6 - d5 * d4;
      if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        q = a + (d1 / (d1 - d3)) * ab;
      } else if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        q = a + (d2 / (d2 - d6)) * ac;
      } else if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        q = b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
      } else {
        const double denom = 1.0 / (va + vb + vc);
        q = a + ab * (vb * denom) + ac * (vc * denom);
      }
    }
  }
  return (p - q).norm();
}

double distance_to_surface(const SurfaceMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t)
    best = std::min(best, point_triangle_distance(mesh.triangle_vertex(t, 0),
                                                  mesh.triangle_vertex(t, 1),
                                                  mesh.triangle_vertex(t, 2), p));
  return best;
}

SurfaceMesh merge_meshes(const std::vector<SurfaceMesh>& parts) {
  SurfaceMesh out;
  Eigen::Index nv = 0, nt = 0;
  for (const auto& m : parts) {
    nv += m.vertex_count();
    nt += m.triangle_count();
  }
  out.vertices.resize(nv, 3);
  out.triangles.resize(nt, 3);
  Eigen::Index voff = 0, toff = 0;
  for (const auto& m : parts) {
    out.vertices.middleRows(voff, m.vertex_count()) = m.vertices;
    out.triangles.middleRows(toff, m.triangle_count()) = m.triangles.array() + static_cast<int>(voff);
    voff += m.vertex_count();
    toff += m.triangle_count();
  }
  return out;
}

void write_off(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(17);
  f << "OFF\n" << mesh.vertex_count() << " " << mesh.triangle_count() << " 0\n";
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v)
    f << mesh.vertices(v, 0) << " " << mesh.vertices(v, 1) << " " << mesh.vertices(v, 2) << "\n";
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t)
    f << "3 " << mesh.triangles(t, 0) << " " << mesh.triangles(t, 1) << " " << mesh.triangles(t, 2)
      << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

SurfaceMesh read_off(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "OFF") throw std::runtime_error("not an OFF file: " + path);
  Eigen::Index nv = 0, nt = 0, ne = 0;
  f >> nv >> nt >> ne;
  SurfaceMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (Eigen::Index v = 0; v < nv; ++v) f >> mesh.vertices(v, 0) >> mesh.vertices(v, 1) >> mesh.vertices(v, 2);
  mesh.triangles.resize(nt, 3);
  for (Eigen::Index t = 0; t < nt; ++t) {
    int k = 0;
    f >> k;
    if (k != 3) throw std::runtime_error("OFF face is not a triangle");
    f >> mesh.triangles(t, 0) >> mesh.triangles(t, 1) >> mesh.triangles(t, 2);
  }
  if (!f) throw std::runtime_error("truncated OFF file: " + path);
  return mesh;
}

}  // namespace twsar
