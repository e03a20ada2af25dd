#pragma once

#include <functional>
#include <variant>

#include "twsar/types.hpp"

namespace twsar::oracle {

// Separation-of-variables reference solution for the homogeneous penetrable
// sphere centred at the origin (continuity of the field and its normal
// derivative across the interface).
struct SeriesPlaneWave {
  Vec3 direction;
};
struct SeriesPointSource {
  Vec3 position;
};

struct SphereSeriesConfig {
  double radius = 1.0;
  cd k0;
  cd kD;
  int order_cap = 64;
  std::variant<SeriesPlaneWave, SeriesPointSource> source = SeriesPlaneWave{Vec3(0, 0, 1)};
};

VecXc sphere_series_field(const SphereSeriesConfig& config, const MatX3& eval_points);

// Central finite differences of a scalar function, one column per coordinate.
VecX fd_gradient(const std::function<double(const VecX&)>& f, const VecX& m, double h);

enum class ProxKind { l1, tv };

// Dense reference minimiser of 0.5||x - y||^2 + tau * R(x) for tiny real
// images (<= 9 unknowns): Huber-smoothed Newton continuation with seeded
// restarts, polished until the nonsmooth objective is stable to ~1e-10.
VecX prox_bruteforce(const VecX& y, int nx, int ny, double tau, ProxKind kind);

// Nonsmooth objective used by prox_bruteforce (exposed for tests).
double prox_objective(const VecX& x, const VecX& y, int nx, int ny, double tau, ProxKind kind);

}  // namespace twsar::oracle
