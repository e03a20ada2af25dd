#include "twsar/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace twsar {

GaussRule1D gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss order must be >= 1");
  GaussRule1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  // Newton on Legendre P_n over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = 0.5 * (1.0 - x);  // descending x -> ascending node
    rule.w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

TriangleRule triangle_rule_order4() {
  TriangleRule r;
  const double w1 = 0.223381589678011, a1 = 0.445948490915965;
  const double w2 = 0.109951743655322, a2 = 0.091576213509771;
  auto push = [&](double l0, double l1, double l2, double w) {
    r.bary.push_back({l0, l1, l2});
    r.weights.push_back(w);
  };
  push(1 - 2 * a1, a1, a1, w1);
  push(a1, 1 - 2 * a1, a1, w1);
  push(a1, a1, 1 - 2 * a1, w1);
  push(1 - 2 * a2, a2, a2, w2);
  push(a2, 1 - 2 * a2, a2, w2);
  push(a2, a2, 1 - 2 * a2, w2);
  return r;
}

TriangleRule triangle_rule_order2() {
  TriangleRule r;
  const double third = 1.0 / 6.0;
  auto push = [&](double l0, double l1, double l2) {
    r.bary.push_back({l0, l1, l2});
    r.weights.push_back(1.0 / 3.0);
  };
  push(4 * third, third, third);
  push(third, 4 * third, third);
  push(third, third, 4 * third);
  return r;
}

PairRule pair_rule_regular(const TriangleRule& ra, const TriangleRule& rb) {
  PairRule rule;
  rule.reserve(ra.bary.size() * rb.bary.size());
  for (std::size_t p = 0; p < ra.bary.size(); ++p)
    for (std::size_t q = 0; q < rb.bary.size(); ++q) {
      PairPoint pt;
      pt.u1 = 1.0 - ra.bary[p][0];
      pt.u2 = ra.bary[p][2];
      pt.v1 = 1.0 - rb.bary[q][0];
      pt.v2 = rb.bary[q][2];
      pt.w = 0.25 * ra.weights[p] * rb.weights[q];
      rule.push_back(pt);
    }
  return rule;
}

// The three singular rules integrate over the relative coordinate w = v - u.
// Each region is a Duffy-style scaling in which the kernel singularity at
// w = 0 (coincident), or at the shared edge/vertex, is cancelled by the
// transform Jacobian. Region measures sum to 1/4 = |T|^2 exactly.

PairRule pair_rule_coincident(int order) {
  const GaussRule1D g = gauss_legendre_01(order);
  PairRule rule;
  rule.reserve(6 * order * order * order * order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j)
      for (int k = 0; k < order; ++k)
        for (int l = 0; l < order; ++l) {
          const double xi = g.x[i], eta = g.x[j], t1 = g.x[k], t2 = g.x[l];
          const double wt = g.w[i] * g.w[j] * g.w[k] * g.w[l] * xi * (1 - xi) * (1 - xi) * t1;
          auto push = [&](double w1, double w2, double u1, double u2) {
            rule.push_back({u1, u2, u1 + w1, u2 + w2, wt});
          };
          const double r = (1 - xi) * t1;      // scaled outer coordinate
          const double rr = (1 - xi) * t1 * t2;
          push(xi, xi * eta, r, rr);                                    // 0 <= w2 <= w1
          push(xi * eta, xi, xi * (1 - eta) + r, rr);                   // 0 <= w1 <= w2
          push(xi * eta, xi * (eta - 1), xi * (1 - eta) + r, xi * (1 - eta) + rr);  // w1>=0>w2
          push(-xi * (1 - eta), xi * eta, xi + r, rr);                  // w1<0<=w2
          push(-xi * eta, -xi, xi + r, xi + rr);                        // w2 <= w1 < 0
          push(-xi, -xi * eta, xi + r, xi * eta + rr);                  // w1 < w2 < 0
        }
  return rule;
}

PairRule pair_rule_edge(int order) {
  const GaussRule1D g = gauss_legendre_01(order);
  PairRule rule;
  rule.reserve(6 * order * order * order * order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j)
      for (int k = 0; k < order; ++k)
        for (int l = 0; l < order; ++l) {
          const double xi = g.x[i], zeta = g.x[j], alpha = g.x[k], beta = g.x[l];
          const double base = g.w[i] * g.w[j] * g.w[k] * g.w[l] * xi * xi * xi * zeta * zeta;
          auto push = [&](double u1, double u2, double v1, double v2, double w) {
            rule.push_back({u1, u2, v1, v2, w});
            rule.push_back({v1, v2, u1, u2, w});  // mirrored branch (s < 0)
          };
          // sigma dominates; then mu; then the rescaled nu.
          push(xi, xi * zeta * alpha, xi * (1 - zeta), xi * (1 - zeta) * zeta * beta,
               base * (1 - zeta));
          push(xi, xi * zeta, xi * (1 - zeta * alpha), xi * (1 - zeta * alpha) * zeta * beta,
               base * (1 - zeta * alpha));
          push(xi, xi * zeta * beta, xi * (1 - zeta * alpha), xi * (1 - zeta * alpha) * zeta,
               base * (1 - zeta * alpha));
        }
  return rule;
}

PairRule pair_rule_vertex(int order) {
  const GaussRule1D g = gauss_legendre_01(order);
  PairRule rule;
  rule.reserve(2 * order * order * order * order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j)
      for (int k = 0; k < order; ++k)
        for (int l = 0; l < order; ++l) {
          const double xi = g.x[i], e1 = g.x[j], e2 = g.x[k], e3 = g.x[l];
          const double wt = g.w[i] * g.w[j] * g.w[k] * g.w[l] * xi * xi * xi * e2;
          rule.push_back({xi, xi * e1, xi * e2, xi * e2 * e3, wt});
          rule.push_back({xi * e2, xi * e2 * e3, xi, xi * e1, wt});
        }
  return rule;
}

}  // namespace twsar
