#include "twsar/bem.hpp"

#include <cmath>
#include <stdexcept>

namespace twsar {

std::atomic<long> BemStats::lu_factorizations{0};

cd complex_wavenumber(double omega, double epsilon_r, double sigma) {
  if (omega <= 0.0) throw std::invalid_argument("omega must be > 0");
  const cd arg(epsilon_r, sigma / (omega * vacuum_permittivity));
  cd k = (omega / speed_of_light) * std::sqrt(arg);
  if (k.imag() < 0.0) k = -k;
  return k;
}

namespace {

struct TriGeom {
  Vec3 v[3];
  Vec3 normal;
  Vec3 curl[3];  // surface curl of the P1 hat at each corner (constant)
  Vec3 centroid;
  double area = 0.0;
  double diam = 0.0;
};

TriGeom make_geom(const SurfaceMesh& mesh, Eigen::Index t) {
  TriGeom g;
  for (int c = 0; c < 3; ++c) g.v[c] = mesh.triangle_vertex(t, c);
  const Vec3 cr = (g.v[1] - g.v[0]).cross(g.v[2] - g.v[0]);
  g.area = 0.5 * cr.norm();
  if (g.area <= 0.0) throw std::runtime_error("degenerate triangle in mesh");
  g.normal = cr / (2.0 * g.area);
  g.centroid = (g.v[0] + g.v[1] + g.v[2]) / 3.0;
  const Vec3 e[3] = {g.v[2] - g.v[1], g.v[0] - g.v[2], g.v[1] - g.v[0]};
  for (int c = 0; c < 3; ++c) {
    g.curl[c] = -e[c] / (2.0 * g.area);
    g.diam = std::max(g.diam, e[c].norm());
  }
  return g;
}

// Child panel of a subdivided triangle; to_parent maps child barycentric
// coordinates to barycentrics of the original panel so P1 hats stay attached
// to the parent's corners.
struct SubPanel {
  Vec3 c[3];
  Eigen::Matrix3d to_parent;
  double area;
};

void subdivide(std::vector<SubPanel>& out, const SubPanel& p, int levels) {
  if (levels == 0) {
    out.push_back(p);
    return;
  }
  const Vec3 m01 = 0.5 * (p.c[0] + p.c[1]);
  const Vec3 m12 = 0.5 * (p.c[1] + p.c[2]);
  const Vec3 m20 = 0.5 * (p.c[2] + p.c[0]);
  Eigen::Vector3d b0 = p.to_parent.col(0), b1 = p.to_parent.col(1), b2 = p.to_parent.col(2);
  Eigen::Vector3d b01 = 0.5 * (b0 + b1), b12 = 0.5 * (b1 + b2), b20 = 0.5 * (b2 + b0);
  auto child = [&](const Vec3& a, const Vec3& b, const Vec3& c, const Eigen::Vector3d& ba,
                   const Eigen::Vector3d& bb, const Eigen::Vector3d& bc) {
    SubPanel s;
    s.c[0] = a;
    s.c[1] = b;
    s.c[2] = c;
    s.to_parent.col(0) = ba;
    s.to_parent.col(1) = bb;
    s.to_parent.col(2) = bc;
    s.area = 0.25 * p.area;
    subdivide(out, s, levels - 1);
  };
  child(p.c[0], m01, m20, b0, b01, b20);
  child(m01, p.c[1], m12, b01, b1, b12);
  child(m20, m12, p.c[2], b20, b12, b2);
  child(m01, m12, m20, b01, b12, b20);
}

std::vector<SubPanel> expand(const TriGeom& g, int levels) {
  SubPanel root;
  root.c[0] = g.v[0];
  root.c[1] = g.v[1];
  root.c[2] = g.v[2];
  root.to_parent.setIdentity();
  root.area = g.area;
  std::vector<SubPanel> out;
  out.reserve(static_cast<std::size_t>(std::pow(4, levels)));
  subdivide(out, root, levels);
  return out;
}

enum class PairKind { regular, vertex_adjacent, edge_adjacent, coincident };

// Per-pair Galerkin contributions at one wavenumber. In the mixed pairing only
// V (scalar), Kab/Kba (3) and Wab (3x3) are used; all_p1 also fills Vab/Kfull.
struct PairBlocks {
  cd V = 0.0;
  cd Kab[3] = {};       // test P0 on a, trial P1 corner j of b
  cd Kba[3] = {};       // test P0 on b, trial P1 corner j of a
  cd Wab[3][3] = {};    // test P1 corner i of a, trial corner j of b
  cd Vab[3][3] = {};    // all_p1 single layer
  cd Kfab[3][3] = {};   // all_p1 double layer, test i on a, trial j on b
  cd Kfba[3][3] = {};   // all_p1 double layer, test j on b, trial i on a
};

struct PairTask {
  const TriGeom* ga;
  const TriGeom* gb;
  PairKind kind;
  int perm_a[3] = {0, 1, 2};
  int perm_b[3] = {0, 1, 2};
};

PairKind classify(const SurfaceMesh& mesh, Eigen::Index ta, Eigen::Index tb, PairTask& task) {
  if (ta == tb) return PairKind::coincident;
  int shared_a[3], shared_b[3], n_shared = 0;
  for (int i = 0; i < 3 && n_shared < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (mesh.triangles(ta, i) == mesh.triangles(tb, j)) {
        shared_a[n_shared] = i;
        shared_b[n_shared] = j;
        ++n_shared;
        break;
      }
  if (n_shared == 0) return PairKind::regular;
  if (n_shared == 1) {
    task.perm_a[0] = shared_a[0];
    task.perm_a[1] = (shared_a[0] + 1) % 3;
    task.perm_a[2] = (shared_a[0] + 2) % 3;
    task.perm_b[0] = shared_b[0];
    task.perm_b[1] = (shared_b[0] + 1) % 3;
    task.perm_b[2] = (shared_b[0] + 2) % 3;
    return PairKind::vertex_adjacent;
  }
  // Edge: both triangles must list the shared edge endpoints in the same
  // order; pick the endpoint with the smaller global id as P0.
  if (mesh.triangles(ta, shared_a[0]) > mesh.triangles(ta, shared_a[1])) {
    std::swap(shared_a[0], shared_a[1]);
    std::swap(shared_b[0], shared_b[1]);
  }
  task.perm_a[0] = shared_a[0];
  task.perm_a[1] = shared_a[1];
  task.perm_a[2] = 3 - shared_a[0] - shared_a[1];
  task.perm_b[0] = shared_b[0];
  task.perm_b[1] = shared_b[1];
  task.perm_b[2] = 3 - shared_b[0] - shared_b[1];
  return PairKind::edge_adjacent;
}

inline cd helmholtz_green(cd k, double r, double invr) {
  const double damp = std::exp(-k.imag() * r);
  const double ph = k.real() * r;
  return cd(damp * std::cos(ph), damp * std::sin(ph)) * (invr / (4.0 * pi));
}

// Integrate one panel pair with a singular transform rule (relabelled coords).
void integrate_singular(const PairTask& task, const PairRule& rule, const cd* ks, int nk,
                        bool all_p1, PairBlocks* out) {
  const TriGeom& ga = *task.ga;
  const TriGeom& gb = *task.gb;
  const Vec3 a0 = ga.v[task.perm_a[0]], a1 = ga.v[task.perm_a[1]], a2 = ga.v[task.perm_a[2]];
  const Vec3 b0 = gb.v[task.perm_b[0]], b1 = gb.v[task.perm_b[1]], b2 = gb.v[task.perm_b[2]];
  const Vec3 ea1 = a1 - a0, ea2 = a2 - a1;
  const Vec3 eb1 = b1 - b0, eb2 = b2 - b1;
  const double jac = 4.0 * ga.area * gb.area;
  const double nn = ga.normal.dot(gb.normal);

  double curl_ab[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) curl_ab[i][j] = ga.curl[i].dot(gb.curl[j]);

  for (const PairPoint& q : rule) {
    const Vec3 x = a0 + q.u1 * ea1 + q.u2 * ea2;
    const Vec3 y = b0 + q.v1 * eb1 + q.v2 * eb2;
    double la[3], lb[3];
    la[task.perm_a[0]] = 1.0 - q.u1;
    la[task.perm_a[1]] = q.u1 - q.u2;
    la[task.perm_a[2]] = q.u2;
    lb[task.perm_b[0]] = 1.0 - q.v1;
    lb[task.perm_b[1]] = q.v1 - q.v2;
    lb[task.perm_b[2]] = q.v2;

    const Vec3 d = x - y;
    const double r = d.norm();
    const double invr = 1.0 / r;
    const double dxn = d.dot(ga.normal) * invr;
    const double dyn = -d.dot(gb.normal) * invr;
    const double w = q.w * jac;

    for (int m = 0; m < nk; ++m) {
      const cd k = ks[m];
      const cd G = helmholtz_green(k, r, invr);
      const cd f = (cd(0.0, 1.0) * k - invr) * G;
      const cd wG = w * G;
      const cd wKy = w * f * dyn;
      const cd wKx = w * f * dxn;
      PairBlocks& blk = out[m];
      blk.V += wG;
      const cd wGk2nn = wG * (k * k) * nn;
      for (int i = 0; i < 3; ++i) {
        blk.Kab[i] += wKy * lb[i];
        blk.Kba[i] += wKx * la[i];
        for (int j = 0; j < 3; ++j) blk.Wab[i][j] += wG * curl_ab[i][j] - wGk2nn * la[i] * lb[j];
      }
      if (all_p1)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            blk.Vab[i][j] += wG * la[i] * lb[j];
            blk.Kfab[i][j] += wKy * la[i] * lb[j];
            blk.Kfba[i][j] += wKx * lb[i] * la[j];
          }
    }
  }
}

// Regular pairs: tensor triangle rule, optionally on subdivided panels when
// the panels are close relative to their size.
void integrate_regular(const TriGeom& ga, const TriGeom& gb, const PairRule& rule, int levels,
                       const cd* ks, int nk, bool all_p1, PairBlocks* out) {
  const std::vector<SubPanel> pas = expand(ga, levels);
  const std::vector<SubPanel> pbs = expand(gb, levels);
  const double nn = ga.normal.dot(gb.normal);
  double curl_ab[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) curl_ab[i][j] = ga.curl[i].dot(gb.curl[j]);

  for (const SubPanel& pa : pas)
    for (const SubPanel& pb : pbs) {
      const Vec3 ea1 = pa.c[1] - pa.c[0], ea2 = pa.c[2] - pa.c[1];
      const Vec3 eb1 = pb.c[1] - pb.c[0], eb2 = pb.c[2] - pb.c[1];
      const double jac = 4.0 * pa.area * pb.area;
      for (const PairPoint& q : rule) {
        const Vec3 x = pa.c[0] + q.u1 * ea1 + q.u2 * ea2;
        const Vec3 y = pb.c[0] + q.v1 * eb1 + q.v2 * eb2;
        const Eigen::Vector3d lca(1.0 - q.u1, q.u1 - q.u2, q.u2);
        const Eigen::Vector3d lcb(1.0 - q.v1, q.v1 - q.v2, q.v2);
        const Eigen::Vector3d lav = pa.to_parent * lca;
        const Eigen::Vector3d lbv = pb.to_parent * lcb;
        const double* la = lav.data();
        const double* lb = lbv.data();

        const Vec3 d = x - y;
        const double r = d.norm();
        const double invr = 1.0 / r;
        const double dxn = d.dot(ga.normal) * invr;
        const double dyn = -d.dot(gb.normal) * invr;
        const double w = q.w * jac;

        for (int m = 0; m < nk; ++m) {
          const cd k = ks[m];
          const cd G = helmholtz_green(k, r, invr);
          const cd f = (cd(0.0, 1.0) * k - invr) * G;
          const cd wG = w * G;
          const cd wKy = w * f * dyn;
          const cd wKx = w * f * dxn;
          PairBlocks& blk = out[m];
          blk.V += wG;
          const cd wGk2nn = wG * (k * k) * nn;
          for (int i = 0; i < 3; ++i) {
            blk.Kab[i] += wKy * lb[i];
            blk.Kba[i] += wKx * la[i];
            for (int j = 0; j < 3; ++j)
              blk.Wab[i][j] += wG * curl_ab[i][j] - wGk2nn * la[i] * lb[j];
          }
          if (all_p1)
            for (int i = 0; i < 3; ++i)
              for (int j = 0; j < 3; ++j) {
                blk.Vab[i][j] += wG * la[i] * lb[j];
                blk.Kfab[i][j] += wKy * la[i] * lb[j];
                blk.Kfba[i][j] += wKx * lb[i] * la[j];
              }
        }
      }
    }
}

struct RuleSet {
  PairRule coincident, edge, vertex, regular;
};

RuleSet make_rules(const QuadratureConfig& quad) {
  RuleSet rs;
  rs.coincident = pair_rule_coincident(quad.singular_order);
  rs.edge = pair_rule_edge(quad.singular_order);
  rs.vertex = pair_rule_vertex(quad.singular_order);
  const TriangleRule tri = quad.regular_points <= 3 ? triangle_rule_order2() : triangle_rule_order4();
  rs.regular = pair_rule_regular(tri, tri);
  return rs;
}

int near_levels(const TriGeom& ga, const TriGeom& gb, const QuadratureConfig& quad) {
  const double d = (ga.centroid - gb.centroid).norm();
  const double diam = std::max(ga.diam, gb.diam);
  if (d < quad.near_ratio_2 * diam) return 2;
  if (d < quad.near_ratio_1 * diam) return 1;
  return 0;
}

void integrate_pair(const SurfaceMesh& mesh_a, Eigen::Index ta, const SurfaceMesh& mesh_b,
                    Eigen::Index tb, bool same_surface, const TriGeom& ga, const TriGeom& gb,
                    const RuleSet& rules, const QuadratureConfig& quad, const cd* ks, int nk,
                    bool all_p1, PairBlocks* out) {
  for (int m = 0; m < nk; ++m) out[m] = PairBlocks{};
  PairTask task{&ga, &gb, PairKind::regular};
  task.kind = same_surface ? classify(mesh_a, ta, tb, task) : PairKind::regular;
  (void)mesh_b;
  switch (task.kind) {
    case PairKind::coincident:
      integrate_singular(task, rules.coincident, ks, nk, all_p1, out);
      break;
    case PairKind::edge_adjacent:
      integrate_singular(task, rules.edge, ks, nk, all_p1, out);
      break;
    case PairKind::vertex_adjacent:
      integrate_singular(task, rules.vertex, ks, nk, all_p1, out);
      break;
    case PairKind::regular:
      integrate_regular(ga, gb, rules.regular, near_levels(ga, gb, quad), ks, nk, all_p1, out);
      break;
  }
}

std::vector<TriGeom> precompute_geoms(const SurfaceMesh& mesh) {
  std::vector<TriGeom> g;
  g.reserve(mesh.triangle_count());
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) g.push_back(make_geom(mesh, t));
  return g;
}

void check_mesh_resolution(const SurfaceMesh& mesh, double kmax) {
  const MeshReport rep = mesh_validate(mesh);
  if (!rep.pass()) throw std::invalid_argument("mesh fails validation (watertight/oriented/area)");
  if (kmax * rep.max_edge_length > 2.0)
    throw std::invalid_argument("mesh too coarse for wavenumber: |k| * max_edge > 2");
}

}  // namespace

CalderonBlocks assemble_calderon(const SurfaceMesh& mesh, cd k, const QuadratureConfig& quad,
                                 TraceSpaces spaces) {
  check_mesh_resolution(mesh, std::abs(k));
  const Eigen::Index nv = mesh.vertex_count();
  const Eigen::Index nt = mesh.triangle_count();
  const bool all_p1 = spaces == TraceSpaces::all_p1;
  const std::vector<TriGeom> geoms = precompute_geoms(mesh);
  const RuleSet rules = make_rules(quad);

  CalderonBlocks blocks;
  blocks.k = k;
  blocks.spaces = spaces;
  if (all_p1) {
    blocks.V = MatXc::Zero(nv, nv);
    blocks.K = MatXc::Zero(nv, nv);
    blocks.W = MatXc::Zero(nv, nv);
    blocks.M = MatX::Zero(nv, nv);
  } else {
    blocks.V = MatXc::Zero(nt, nt);
    blocks.K = MatXc::Zero(nt, nv);
    blocks.W = MatXc::Zero(nv, nv);
    blocks.M = MatX::Zero(nt, nv);
  }

  PairBlocks pb;
  const cd ks[1] = {k};
  for (Eigen::Index ta = 0; ta < nt; ++ta) {
    for (Eigen::Index tb = 0; tb <= ta; ++tb) {
      integrate_pair(mesh, ta, mesh, tb, true, geoms[ta], geoms[tb], rules, quad, ks, 1, all_p1,
                     &pb);
      const bool self = ta == tb;
      if (!all_p1) {
        blocks.V(ta, tb) += pb.V;
        if (!self) blocks.V(tb, ta) += pb.V;
        for (int j = 0; j < 3; ++j) {
          blocks.K(ta, mesh.triangles(tb, j)) += pb.Kab[j];
          if (!self) blocks.K(tb, mesh.triangles(ta, j)) += pb.Kba[j];
        }
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int gi = mesh.triangles(ta, i), gj = mesh.triangles(tb, j);
          if (self) {
            blocks.W(gi, gj) += 0.5 * (pb.Wab[i][j] + pb.Wab[j][i]);
            if (all_p1) {
              blocks.V(gi, gj) += 0.5 * (pb.Vab[i][j] + pb.Vab[j][i]);
              blocks.K(gi, gj) += pb.Kfab[i][j];
            }
          } else {
            blocks.W(gi, gj) += pb.Wab[i][j];
            blocks.W(gj, gi) += pb.Wab[i][j];
            if (all_p1) {
              blocks.V(gi, gj) += pb.Vab[i][j];
              blocks.V(gj, gi) += pb.Vab[i][j];
              blocks.K(gi, gj) += pb.Kfab[i][j];
              blocks.K(gj, gi) += pb.Kfba[j][i];
            }
          }
        }
    }
    // mass rows for panel ta
    const double area = geoms[ta].area;
    for (int i = 0; i < 3; ++i) {
      if (all_p1) {
        for (int j = 0; j < 3; ++j)
          blocks.M(mesh.triangles(ta, i), mesh.triangles(ta, j)) += i == j ? area / 6.0 : area / 12.0;
      } else {
        blocks.M(ta, mesh.triangles(ta, i)) += area / 3.0;
      }
    }
  }
  blocks.Kp = blocks.K.transpose();
  return blocks;
}

// ---------------------------------------------------------------------------
// Transmission system over one or more surfaces.

TransmissionSystem::TransmissionSystem(Scene scene, cd k0, const QuadratureConfig& quad)
    : scene_(std::move(scene)), k0_(k0), quad_(quad) {
  const std::size_t ns = scene_.surfaces.size();
  if (ns == 0 || scene_.k_interior.size() != ns)
    throw std::invalid_argument("scene needs one interior wavenumber per surface");

  double kmax = std::abs(k0_);
  for (const cd kd : scene_.k_interior) kmax = std::max(kmax, std::abs(kd));
  for (const auto& mesh : scene_.surfaces) check_mesh_resolution(mesh, kmax);

  std::vector<Eigen::Index> voff(ns), toff(ns);
  nv_ = nt_ = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    voff[s] = nv_;
    toff[s] = nt_;
    nv_ += scene_.surfaces[s].vertex_count();
    nt_ += scene_.surfaces[s].triangle_count();
  }
  const Eigen::Index n = nv_ + nt_;
  matrix_ = MatXc::Zero(n, n);

  std::vector<std::vector<TriGeom>> geoms(ns);
  for (std::size_t s = 0; s < ns; ++s) geoms[s] = precompute_geoms(scene_.surfaces[s]);
  const RuleSet rules = make_rules(quad_);

  const auto eq0 = [&](std::size_t s, Eigen::Index t) { return toff[s] + t; };
  const auto eq1 = [&](std::size_t s, int gv) { return nt_ + voff[s] + gv; };
  const auto c_g0 = [&](std::size_t s, int gv) { return voff[s] + gv; };
  const auto c_g1 = [&](std::size_t s, Eigen::Index t) { return nv_ + toff[s] + t; };

  PairBlocks pb[2];
  for (std::size_t sa = 0; sa < ns; ++sa) {
    const SurfaceMesh& ma = scene_.surfaces[sa];
    for (std::size_t sb = sa; sb < ns; ++sb) {
      const SurfaceMesh& mb = scene_.surfaces[sb];
      const bool same = sa == sb;
      cd ks[2] = {k0_, scene_.k_interior[sa]};
      const int nk = same ? 2 : 1;
      for (Eigen::Index ta = 0; ta < ma.triangle_count(); ++ta) {
        const Eigen::Index tb_end = same ? ta + 1 : mb.triangle_count();
        for (Eigen::Index tb = 0; tb < tb_end; ++tb) {
          integrate_pair(ma, ta, mb, tb, same, geoms[sa][ta], geoms[sb][tb], rules, quad_, ks, nk,
                         false, pb);
          const bool self = same && ta == tb;
          // sum over wavenumbers: diagonal surface pairs carry k0 + kD
          cd Vs = pb[0].V, Kab[3], Kba[3], Wab[3][3];
          for (int i = 0; i < 3; ++i) {
            Kab[i] = pb[0].Kab[i];
            Kba[i] = pb[0].Kba[i];
            for (int j = 0; j < 3; ++j) Wab[i][j] = pb[0].Wab[i][j];
          }
          if (nk == 2) {
            Vs += pb[1].V;
            for (int i = 0; i < 3; ++i) {
              Kab[i] += pb[1].Kab[i];
              Kba[i] += pb[1].Kba[i];
              for (int j = 0; j < 3; ++j) Wab[i][j] += pb[1].Wab[i][j];
            }
          }

          matrix_(eq0(sa, ta), c_g1(sb, tb)) += Vs;
          if (!self) matrix_(eq0(sb, tb), c_g1(sa, ta)) += Vs;
          for (int j = 0; j < 3; ++j) {
            const int gvb = mb.triangles(tb, j);
            const int gva = ma.triangles(ta, j);
            matrix_(eq0(sa, ta), c_g0(sb, gvb)) -= Kab[j];
            matrix_(eq1(sb, gvb), c_g1(sa, ta)) += Kab[j];
            if (!self) {
              matrix_(eq0(sb, tb), c_g0(sa, gva)) -= Kba[j];
              matrix_(eq1(sa, gva), c_g1(sb, tb)) += Kba[j];
            }
          }
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              const int gva = ma.triangles(ta, i);
              const int gvb = mb.triangles(tb, j);
              if (self) {
                matrix_(eq1(sa, gva), c_g0(sb, gvb)) += 0.5 * (Wab[i][j] + Wab[j][i]);
              } else {
                matrix_(eq1(sa, gva), c_g0(sb, gvb)) += Wab[i][j];
                matrix_(eq1(sb, gvb), c_g0(sa, gva)) += Wab[i][j];
              }
            }
        }
      }
    }
  }

  lu_.compute(matrix_);
  BemStats::lu_factorizations.fetch_add(1);
}

namespace {

struct IncidentEval {
  cd value;
  Eigen::Vector3cd gradient;
};

IncidentEval incident_at(const IncidentField& inc, cd k, const Vec3& x) {
  IncidentEval out;
  if (const PlaneWave* pw = std::get_if<PlaneWave>(&inc)) {
    const Vec3 d = pw->direction.normalized();
    const cd ph = cd(0.0, 1.0) * k * d.dot(x);
    out.value = std::exp(ph);
    out.gradient = (cd(0.0, 1.0) * k * out.value) * d.cast<cd>();
  } else {
    const Vec3 y = std::get<PointSource>(inc).position;
    const Vec3 dv = x - y;
    const double r = dv.norm();
    if (r == 0.0) throw std::invalid_argument("incident point source on surface");
    const double invr = 1.0 / r;
    const cd G = helmholtz_green(k, r, invr);
    out.value = G;
    out.gradient = ((cd(0.0, 1.0) * k - invr) * G * invr) * dv.cast<cd>();
  }
  return out;
}

}  // namespace

VecXc TransmissionSystem::assemble_rhs(const IncidentField& incident) const {
  VecXc b = VecXc::Zero(nv_ + nt_);
  const TriangleRule rule =
      quad_.potential_points <= 3 ? triangle_rule_order2() : triangle_rule_order4();
  Eigen::Index voff = 0, toff = 0;
  for (const auto& mesh : scene_.surfaces) {
    for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
      const TriGeom g = make_geom(mesh, t);
      for (std::size_t p = 0; p < rule.bary.size(); ++p) {
        const auto& l = rule.bary[p];
        const Vec3 x = l[0] * g.v[0] + l[1] * g.v[1] + l[2] * g.v[2];
        const IncidentEval ev = incident_at(incident, k0_, x);
        const double w = rule.weights[p] * g.area;
        b(toff + t) += w * ev.value;
        const cd dudn = ev.gradient.dot(g.normal.cast<cd>());
        for (int c = 0; c < 3; ++c)
          b(nt_ + voff + mesh.triangles(t, c)) += w * dudn * l[c];
      }
    }
    voff += mesh.vertex_count();
    toff += mesh.triangle_count();
  }
  return b;
}

CauchyTraces TransmissionSystem::solve(const IncidentField& incident) const {
  const VecXc b = assemble_rhs(incident);
  const VecXc x = lu_.solve(b);
  CauchyTraces traces;
  traces.dirichlet = x.head(nv_);
  traces.neumann = x.tail(nt_);
  return traces;
}

double TransmissionSystem::residual(const CauchyTraces& traces, const IncidentField& incident) const {
  VecXc x(nv_ + nt_);
  x.head(nv_) = traces.dirichlet;
  x.tail(nt_) = traces.neumann;
  const VecXc b = assemble_rhs(incident);
  return (matrix_ * x - b).norm() / b.norm();
}

double TransmissionSystem::condition_estimate() const { return 1.0 / lu_.rcond(); }

const TransmissionSystem& TransmissionSolver::system(cd k0, const std::vector<cd>& k_interior) {
  const std::pair<double, double> key(k0.real(), k0.imag());
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    Scene scene = scene_;
    scene.k_interior = k_interior;
    it = cache_.emplace(key, std::make_unique<TransmissionSystem>(std::move(scene), k0, quad_)).first;
  }
  return *it->second;
}

VecXc evaluate_scattered(const Scene& scene, const CauchyTraces& traces, cd k0, const MatX3& points,
                         const QuadratureConfig& quad, NearPolicy policy) {
  const TriangleRule rule =
      quad.potential_points <= 3 ? triangle_rule_order2() : triangle_rule_order4();
  Eigen::Index nv = 0, nt = 0;
  for (const auto& m : scene.surfaces) {
    nv += m.vertex_count();
    nt += m.triangle_count();
  }
  if (traces.dirichlet.size() != nv || traces.neumann.size() != nt)
    throw std::invalid_argument("trace size mismatch with scene");

  // Flatten the layer densities into weighted quadrature monopoles/dipoles.
  struct Src {
    Vec3 y, n;
    cd dl, sl;
  };
  std::vector<Src> srcs;
  srcs.reserve(static_cast<std::size_t>(nt) * rule.bary.size());
  Eigen::Index voff = 0, toff = 0;
  for (const auto& mesh : scene.surfaces) {
    for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
      const TriGeom g = make_geom(mesh, t);
      if (policy == NearPolicy::strict)
        for (Eigen::Index pi = 0; pi < points.rows(); ++pi)
          if (point_triangle_distance(g.v[0], g.v[1], g.v[2], points.row(pi).transpose()) <= g.diam)
            throw std::invalid_argument("evaluation point too close to surface");
      const cd d0 = traces.dirichlet(voff + mesh.triangles(t, 0));
      const cd d1 = traces.dirichlet(voff + mesh.triangles(t, 1));
      const cd d2 = traces.dirichlet(voff + mesh.triangles(t, 2));
      const cd gn = traces.neumann(toff + t);
      for (std::size_t qp = 0; qp < rule.bary.size(); ++qp) {
        const auto& l = rule.bary[qp];
        const double w = rule.weights[qp] * g.area;
        srcs.push_back({l[0] * g.v[0] + l[1] * g.v[1] + l[2] * g.v[2], g.normal,
                        w * (l[0] * d0 + l[1] * d1 + l[2] * d2), w * gn});
      }
    }
    voff += mesh.vertex_count();
    toff += mesh.triangle_count();
  }

  VecXc field(points.rows());
  for (Eigen::Index pi = 0; pi < points.rows(); ++pi) {
    const Vec3 p = points.row(pi).transpose();
    cd acc = 0.0;
    for (const Src& s : srcs) {
      const Vec3 d = p - s.y;
      const double r = d.norm();
      const double invr = 1.0 / r;
      const cd G = helmholtz_green(k0, r, invr);
      const cd f = (cd(0.0, 1.0) * k0 - invr) * G * invr * (-d.dot(s.n));
      acc += f * s.dl - G * s.sl;
    }
    field(pi) = acc;
  }
  return field;
}

VecXc scattered_field_point_source(const Scene& scene, cd k0, const Vec3& source,
                                   const MatX3& eval_points, const QuadratureConfig& quad) {
  TransmissionSystem system(scene, k0, quad);
  const CauchyTraces traces = system.solve(PointSource{source});
  return evaluate_scattered(scene, traces, k0, eval_points, quad);
}

}  // namespace twsar
