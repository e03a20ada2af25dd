#pragma once

#include <vector>

#include "twsar/types.hpp"

namespace twsar {

// Gauss-Legendre nodes/weights on [0,1].
struct GaussRule1D {
  std::vector<double> x, w;
};
GaussRule1D gauss_legendre_01(int n);

// Symmetric triangle rule in barycentric coordinates; weights sum to 1, so
// integral over a physical triangle is area * sum(w_p * f(p)).
struct TriangleRule {
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> weights;
};
TriangleRule triangle_rule_order4();   // 6 points, degree 4
TriangleRule triangle_rule_order2();   // 3 points, degree 2

// Quadrature for 4D Galerkin integrals over a pair of reference triangles
// T = {0 <= u2 <= u1 <= 1}, parameterised x(u) = a0 + u1(a1-a0) + u2(a2-a1).
// Each point carries coordinates for the test (u) and trial (v) triangle and
// a weight; weights include all transform Jacobians so that
//   I = sum_p w_p f(u_p, v_p)  ==  Int_T Int_T f(u, v) du dv.
// The transforms regularise 1/|x-y| kernels for coincident, edge-adjacent and
// vertex-adjacent panel pairs (after vertex relabelling by the caller).
struct PairPoint {
  double u1, u2, v1, v2, w;
};
using PairRule = std::vector<PairPoint>;

PairRule pair_rule_coincident(int order);
PairRule pair_rule_edge(int order);
PairRule pair_rule_vertex(int order);
// Tensor rule from two triangle rules mapped to the reference simplex.
PairRule pair_rule_regular(const TriangleRule& ra, const TriangleRule& rb);

}  // namespace twsar
