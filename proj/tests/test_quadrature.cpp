#include <doctest.h>

#include <cmath>

#include "twsar/quadrature.hpp"

using namespace twsar;

TEST_CASE("gauss-legendre rules integrate polynomials") {
  for (int n : {1, 2, 4, 8}) {
    const GaussRule1D g = gauss_legendre_01(n);
    double s = 0.0, sx = 0.0;
    for (int i = 0; i < n; ++i) {
      s += g.w[i];
      sx += g.w[i] * std::pow(g.x[i], 2 * n - 1);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sx == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-13));  // exact up to degree 2n-1
  }
}

TEST_CASE("triangle rules have unit weight and degree") {
  for (const TriangleRule& r : {triangle_rule_order2(), triangle_rule_order4()}) {
    double s = 0.0;
    double sx = 0.0;
    for (std::size_t p = 0; p < r.bary.size(); ++p) {
      s += r.weights[p];
      sx += r.weights[p] * r.bary[p][0];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sx == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
}

namespace {

// Midpoint rule over the reference simplex {0 <= u2 <= u1 <= 1}.
template <typename G>
double simplex_quad(const G& g, int n) {
  double tot = 0.0;
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) tot += h * h * g((i + 0.5) * h, (j + 0.5) * h);
    tot += 0.5 * h * h * g((i + 2.0 / 3.0) * h, (i + 1.0 / 3.0) * h);
  }
  return tot;
}

// Brute-force reference for smooth pair integrands.
template <typename F>
double brute_force_pair(const F& f, int n) {
  return simplex_quad(
      [&](double u1, double u2) {
        return simplex_quad([&](double v1, double v2) { return f(u1, u2, v1, v2); }, n);
      },
      n);
}

double rule_sum(const PairRule& rule) {
  double s = 0.0;
  for (const auto& p : rule) s += p.w;
  return s;
}

template <typename F>
double rule_apply(const PairRule& rule, const F& f) {
  double s = 0.0;
  for (const auto& p : rule) s += p.w * f(p.u1, p.u2, p.v1, p.v2);
  return s;
}

}  // namespace

TEST_CASE("pair rule weights integrate the constant exactly") {
  CHECK(rule_sum(pair_rule_regular(triangle_rule_order4(), triangle_rule_order4())) ==
        doctest::Approx(0.25).epsilon(1e-13));
  CHECK(rule_sum(pair_rule_coincident(4)) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(rule_sum(pair_rule_edge(4)) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(rule_sum(pair_rule_vertex(4)) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("singular pair rules integrate smooth separable functions") {
  auto f = [](double u1, double u2, double v1, double v2) {
    return (1.0 + u1 * v2) * std::cos(u2 + v1);
  };
  const double ref = brute_force_pair(f, 120);
  CHECK(rule_apply(pair_rule_coincident(6), f) == doctest::Approx(ref).epsilon(5e-4));
  CHECK(rule_apply(pair_rule_edge(6), f) == doctest::Approx(ref).epsilon(5e-4));
  CHECK(rule_apply(pair_rule_vertex(6), f) == doctest::Approx(ref).epsilon(5e-4));
}

TEST_CASE("coincident rule resolves the 1/|w| singularity") {
  // kernel 1/|u - v| on the simplex pair: compare two consecutive orders
  auto f = [](double u1, double u2, double v1, double v2) {
    const double dx = u1 - v1, dy = u2 - v2;
    return 1.0 / std::sqrt(dx * dx + dy * dy);
  };
  const double a5 = rule_apply(pair_rule_coincident(5), f);
  const double a8 = rule_apply(pair_rule_coincident(8), f);
  const double a12 = rule_apply(pair_rule_coincident(12), f);
  CHECK(std::abs(a8 - a12) < std::abs(a5 - a12));
  CHECK(std::abs(a8 - a12) / std::abs(a12) < 1e-4);
}
