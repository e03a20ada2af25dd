#include <doctest.h>

#include <cmath>

#include "twsar/bem.hpp"
#include "twsar/oracle.hpp"

using namespace twsar;

namespace {

MatX3 ring_points(double radius, int n, double z = 0.0) {
  MatX3 pts(n, 3);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * pi * i / n + 0.1;
    pts.row(i) = Vec3(radius * std::cos(th), radius * std::sin(th), z).transpose();
  }
  return pts;
}

}  // namespace

TEST_CASE("complex wavenumber map") {
  const double omega = 2.0 * pi * 349.9e6;
  CHECK(complex_wavenumber(omega, 1.0, 0.0).real() == doctest::Approx(omega / speed_of_light));
  CHECK(complex_wavenumber(omega, 1.0, 0.0).imag() == doctest::Approx(0.0));
  CHECK(complex_wavenumber(omega, 4.0, 0.0).real() ==
        doctest::Approx(2.0 * omega / speed_of_light));
  // independent hand evaluation: k = (w/c) sqrt(2.85)
  const cd k = complex_wavenumber(omega, 2.85, 0.0);
  CHECK(k.real() == doctest::Approx(omega / speed_of_light * std::sqrt(2.85)).epsilon(1e-12));
  // conductive: Im(k) > 0
  CHECK(complex_wavenumber(omega, 2.85, 0.05).imag() > 0.0);
}

TEST_CASE("calderon blocks: symmetry, adjoint, laplace limit") {
  const SurfaceMesh mesh = build_sphere_mesh(1.0, Vec3::Zero(), 0.7);
  QuadratureConfig quad;
  const CalderonBlocks blk = assemble_calderon(mesh, cd(1.0, 0.0), quad);

  CHECK((blk.V - blk.V.transpose()).norm() <= 1e-10 * blk.V.norm());
  CHECK((blk.Kp - blk.K.transpose()).norm() <= 1e-10 * blk.K.norm());
  CHECK((blk.W - blk.W.transpose()).norm() <= 1e-10 * blk.W.norm());

  // k -> 0: V entries approach the Laplace single layer
  const CalderonBlocks tiny = assemble_calderon(mesh, cd(1e-8, 0.0), quad);
  const CalderonBlocks zero = assemble_calderon(mesh, cd(0.0, 0.0), quad);
  CHECK((tiny.V - zero.V).norm() / zero.V.norm() < 1e-7);
  // Laplace V is real positive definite up to quadrature error
  CHECK(zero.V.imag().norm() < 1e-12 * zero.V.real().norm());

  // doubling the singular order barely changes entries (self-convergence)
  QuadratureConfig quad8 = quad;
  quad8.singular_order = 8;
  const CalderonBlocks blk8 = assemble_calderon(mesh, cd(1.0, 0.0), quad8);
  CHECK((blk.V - blk8.V).cwiseAbs().maxCoeff() / blk8.V.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("calderon projector property improves under refinement (all-P1)") {
  QuadratureConfig quad;
  const cd k(1.5, 0.0);
  double prev = 0.0;
  int step = 0;
  for (double edge : {0.8, 0.4}) {
    const SurfaceMesh mesh = build_sphere_mesh(1.0, Vec3::Zero(), edge);
    const CalderonBlocks b = assemble_calderon(mesh, k, quad, TraceSpaces::all_p1);
    const Eigen::Index nv = mesh.vertex_count();
    MatXc A(2 * nv, 2 * nv);
    A.topLeftCorner(nv, nv) = -b.K;
    A.topRightCorner(nv, nv) = b.V;
    A.bottomLeftCorner(nv, nv) = b.W;
    A.bottomRightCorner(nv, nv) = b.Kp;
    MatX M = MatX::Zero(2 * nv, 2 * nv);
    M.topLeftCorner(nv, nv) = b.M;
    M.bottomRightCorner(nv, nv) = b.M;
    const MatXc Atil = M.ldlt().solve(A.real()).cast<cd>() +
                       cd(0, 1) * M.ldlt().solve(A.imag()).cast<cd>();
    const MatXc P = 0.5 * MatXc::Identity(2 * nv, 2 * nv) + Atil;
    const double defect = (P * P - P).norm() / P.norm();
    if (step++ > 0) CHECK(defect < 0.7 * prev);
    prev = defect;
  }
  CHECK(prev < 0.08);
}

TEST_CASE("zero contrast scatters nothing") {
  const SurfaceMesh mesh = build_sphere_mesh(1.0, Vec3::Zero(), 0.45);
  Scene scene{{mesh}, {cd(2.0, 0.0)}};
  QuadratureConfig quad;
  TransmissionSystem sys(scene, cd(2.0, 0.0), quad);
  const CauchyTraces tr = sys.solve(PlaneWave{Vec3(0, 0, 1)});
  CHECK(sys.residual(tr, PlaneWave{Vec3(0, 0, 1)}) < 1e-8);
  const MatX3 pts = ring_points(3.0, 10);
  const VecXc us = evaluate_scattered(scene, tr, cd(2.0, 0.0), pts, quad);
  // incident magnitude is 1
  CHECK(us.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("penetrable sphere matches the partial-wave series") {
  const double a = 1.0;
  const double k0 = 1.0;
  const double epsr = 3.0;
  const cd kD = std::sqrt(cd(epsr, 0.0)) * k0;
  const double lambda_int = 2.0 * pi / kD.real();

  const SurfaceMesh mesh = build_sphere_mesh(a, Vec3::Zero(), lambda_int / 6.0);
  Scene scene{{mesh}, {kD}};
  QuadratureConfig quad;
  TransmissionSystem sys(scene, cd(k0, 0.0), quad);

  const MatX3 pts = ring_points(3.0, 25);

  SUBCASE("plane wave") {
    const CauchyTraces tr = sys.solve(PlaneWave{Vec3(0, 0, 1)});
    const VecXc bem = evaluate_scattered(scene, tr, cd(k0, 0.0), pts, quad);
    oracle::SphereSeriesConfig cfg;
    cfg.radius = a;
    cfg.k0 = cd(k0, 0.0);
    cfg.kD = kD;
    cfg.source = oracle::SeriesPlaneWave{Vec3(0, 0, 1)};
    const VecXc ref = oracle::sphere_series_field(cfg, pts);
    const double rel = (bem - ref).norm() / ref.norm();
    CHECK(rel < 0.03);
  }

  SUBCASE("point source at ten radii") {
    const Vec3 src(0.0, 0.0, 10.0);
    const CauchyTraces tr = sys.solve(PointSource{src});
    const VecXc bem = evaluate_scattered(scene, tr, cd(k0, 0.0), pts, quad);
    oracle::SphereSeriesConfig cfg;
    cfg.radius = a;
    cfg.k0 = cd(k0, 0.0);
    cfg.kD = kD;
    cfg.source = oracle::SeriesPointSource{src};
    const VecXc ref = oracle::sphere_series_field(cfg, pts);
    CHECK((bem - ref).norm() / ref.norm() < 0.03);
  }
}

TEST_CASE("transmission solve reuses one LU per frequency") {
  const SurfaceMesh mesh = build_sphere_mesh(0.5, Vec3::Zero(), 0.3);
  Scene scene{{mesh}, {}};
  QuadratureConfig quad;
  TransmissionSolver solver(scene, quad);
  const long before = BemStats::lu_factorizations.load();
  const std::vector<cd> kd = {cd(3.0, 0.0)};
  const TransmissionSystem& sys = solver.system(cd(2.0, 0.0), kd);
  for (int s = 0; s < 5; ++s) {
    const TransmissionSystem& again = solver.system(cd(2.0, 0.0), kd);
    again.solve(PointSource{Vec3(0, 0, 2.0 + s)});
    CHECK(&again == &sys);
  }
  CHECK(BemStats::lu_factorizations.load() - before == 1);
}

TEST_CASE("reciprocity of the perturbed green function") {
  WallParams p;
  p.lengths = Vec2(0.8, 0.8);
  p.thickness = 0.15;
  p.height = 0.4;
  p.epsilon_r = 2.5;
  const double omega = 2.0 * pi * 349.9e6;
  const cd k0(omega / speed_of_light, 0.0);
  const cd kD = complex_wavenumber(omega, p.epsilon_r, 0.0);
  const double edge = 2.0 * pi / std::abs(kD) / 5.0;
  const SurfaceMesh mesh = build_corner_wall(p, edge);
  Scene scene{{mesh}, {kD}};
  QuadratureConfig quad;

  const Vec3 pa(2.0, 0.3, 0.05);
  const Vec3 pb(-0.4, 2.2, -0.1);
  MatX3 at_b(1, 3), at_a(1, 3);
  at_b.row(0) = pb.transpose();
  at_a.row(0) = pa.transpose();

  TransmissionSystem sys(scene, k0, quad);
  const VecXc uab = evaluate_scattered(scene, sys.solve(PointSource{pa}), k0, at_b, quad);
  const VecXc uba = evaluate_scattered(scene, sys.solve(PointSource{pb}), k0, at_a, quad);
  CHECK(std::abs(uab(0) - uba(0)) / std::abs(uab(0)) < 1e-3);
}

TEST_CASE("scattered field self-convergence on the sphere") {
  const double k0 = 2.0;
  const cd kD(3.0, 0.0);
  const MatX3 pts = ring_points(2.5, 6);
  QuadratureConfig quad;

  oracle::SphereSeriesConfig cfg;
  cfg.radius = 1.0;
  cfg.k0 = cd(k0, 0.0);
  cfg.kD = kD;
  cfg.source = oracle::SeriesPlaneWave{Vec3(1, 0, 0)};
  const VecXc ref = oracle::sphere_series_field(cfg, pts);

  double err_prev = 0.0;
  int step = 0;
  for (double edge : {0.7, 0.35}) {
    const SurfaceMesh mesh = build_sphere_mesh(1.0, Vec3::Zero(), edge);
    Scene scene{{mesh}, {kD}};
    TransmissionSystem sys(scene, cd(k0, 0.0), quad);
    const VecXc u = evaluate_scattered(scene, sys.solve(PlaneWave{Vec3(1, 0, 0)}), cd(k0, 0.0),
                                       pts, quad);
    const double err = (u - ref).norm() / ref.norm();
    if (step++ > 0) {
      const double order = std::log2(err_prev / err);
      CHECK(order >= 1.0);
    }
    err_prev = err;
  }
}

TEST_CASE("near-surface evaluation is rejected under the strict policy") {
  const SurfaceMesh mesh = build_sphere_mesh(1.0, Vec3::Zero(), 0.5);
  Scene scene{{mesh}, {cd(1.5, 0.0)}};
  QuadratureConfig quad;
  TransmissionSystem sys(scene, cd(1.0, 0.0), quad);
  const CauchyTraces tr = sys.solve(PlaneWave{Vec3(0, 0, 1)});
  MatX3 near(1, 3);
  near.row(0) = Vec3(1.05, 0, 0).transpose();
  CHECK_THROWS(evaluate_scattered(scene, tr, cd(1.0, 0.0), near, quad, NearPolicy::strict));
  CHECK_NOTHROW(evaluate_scattered(scene, tr, cd(1.0, 0.0), near, quad, NearPolicy::best_effort));
}

TEST_CASE("resolution guard rejects coarse meshes") {
  const SurfaceMesh mesh = build_sphere_mesh(1.0, Vec3::Zero(), 0.8);
  Scene scene{{mesh}, {cd(10.0, 0.0)}};
  QuadratureConfig quad;
  CHECK_THROWS(TransmissionSystem(scene, cd(10.0, 0.0), quad));
}

TEST_CASE("sphere series oracle sanity") {
  oracle::SphereSeriesConfig cfg;
  cfg.radius = 1.0;
  cfg.k0 = cd(1.2, 0.0);
  cfg.kD = cd(1.2, 0.0);
  const MatX3 pts = ring_points(2.0, 4);
  SUBCASE("zero contrast vanishes") {
    const VecXc u = oracle::sphere_series_field(cfg, pts);
    CHECK(u.cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("small sphere scatters weakly") {
    cfg.kD = cd(2.0, 0.0);
    const VecXc u1 = oracle::sphere_series_field(cfg, pts);
    oracle::SphereSeriesConfig small = cfg;
    small.radius = 0.05;
    const VecXc u2 = oracle::sphere_series_field(small, pts);
    CHECK(u2.cwiseAbs().maxCoeff() < 1e-2 * u1.cwiseAbs().maxCoeff());
  }
  SUBCASE("series self-consistency under order increase") {
    cfg.kD = cd(2.0, 0.4);
    cfg.order_cap = 40;
    const VecXc u1 = oracle::sphere_series_field(cfg, pts);
    cfg.order_cap = 50;
    const VecXc u2 = oracle::sphere_series_field(cfg, pts);
    CHECK((u1 - u2).norm() <= 1e-10 * u2.norm());
  }
  SUBCASE("point-source reciprocity") {
    cfg.kD = cd(1.8, 0.0);
    const Vec3 xa(0, 0, 3.0), xb(2.5, 0.5, -0.4);
    oracle::SphereSeriesConfig ca = cfg;
    ca.source = oracle::SeriesPointSource{xa};
    MatX3 pb(1, 3);
    pb.row(0) = xb.transpose();
    oracle::SphereSeriesConfig cb = cfg;
    cb.source = oracle::SeriesPointSource{xb};
    MatX3 pa(1, 3);
    pa.row(0) = xa.transpose();
    const cd uab = oracle::sphere_series_field(ca, pb)(0);
    const cd uba = oracle::sphere_series_field(cb, pa)(0);
    CHECK(std::abs(uab - uba) <= 1e-8 * std::abs(uab));
  }
}
