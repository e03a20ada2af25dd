#include "twsar/oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace twsar::oracle {

namespace {

// Spherical Bessel j_n for complex argument by downward (Miller) recurrence,
// y_n upward; both normalised against the closed forms at n = 0.
void spherical_bessel(cd z, int nmax, std::vector<cd>& j, std::vector<cd>& y) {
  j.assign(nmax + 2, cd(0.0));
  y.assign(nmax + 2, cd(0.0));
  const double az = std::abs(z);
  if (az < 1e-14) {
    j[0] = 1.0;  // remaining j_n ~ z^n -> 0; y_n blow up but are never used then
    for (int n = 0; n <= nmax + 1; ++n) y[n] = cd(-1e300);
    return;
  }
  const int start = nmax + 16 + static_cast<int>(az);
  cd fp = 0.0, fc = 1e-280;
  std::vector<cd> tmp(start + 1);
  tmp[start] = fc;
  for (int n = start; n >= 1; --n) {
    const cd fm = (2.0 * n + 1.0) / z * fc - fp;
    fp = fc;
    fc = fm;
    if (n - 1 <= nmax + 1) tmp[n - 1] = fm;
    // rescale to avoid overflow
    if (std::abs(fc) > 1e250) {
      fc *= 1e-250;
      fp *= 1e-250;
      for (int m = std::max(0, n - 1); m <= nmax + 1; ++m) tmp[m] *= 1e-250;
    }
  }
  const cd j0 = std::sin(z) / z;
  const cd scale = j0 / tmp[0];
  for (int n = 0; n <= nmax + 1; ++n) j[n] = tmp[n] * scale;

  y[0] = -std::cos(z) / z;
  if (nmax >= 0) y[1] = -std::cos(z) / (z * z) - std::sin(z) / z;
  for (int n = 1; n <= nmax; ++n) y[n + 1] = (2.0 * n + 1.0) / z * y[n] - y[n - 1];
}

inline cd bessel_deriv(const std::vector<cd>& f, int n, cd z) {
  if (n == 0) return -f[1];
  return f[n - 1] - (n + 1.0) / z * f[n];
}

}  // namespace

VecXc sphere_series_field(const SphereSeriesConfig& config, const MatX3& eval_points) {
  const double a = config.radius;
  if (a <= 0.0) throw std::invalid_argument("sphere radius must be > 0");
  const cd k0 = config.k0, kD = config.kD;
  const int safety = static_cast<int>(std::ceil(std::abs(k0) * a)) + 10;
  const int cap = std::max(config.order_cap, safety);

  const cd qe = k0 * a, qi = kD * a;
  std::vector<cd> je, ye, ji, yi;
  spherical_bessel(qe, cap, je, ye);
  spherical_bessel(qi, cap, ji, yi);

  // Transmission coefficients of the scattered (outgoing) series.
  std::vector<cd> b(cap + 1);
  for (int n = 0; n <= cap; ++n) {
    const cd jn_e = je[n], jn_i = ji[n];
    const cd hn_e = je[n] + cd(0, 1) * ye[n];
    const cd djn_e = bessel_deriv(je, n, qe);
    const cd djn_i = bessel_deriv(ji, n, qi);
    const cd dhn_e = djn_e + cd(0, 1) * bessel_deriv(ye, n, qe);
    const cd num = kD * djn_i * jn_e - k0 * djn_e * jn_i;
    const cd den = k0 * dhn_e * jn_i - kD * djn_i * hn_e;
    b[n] = num / den;
  }

  // Incident-field expansion coefficients A_n with u_in = sum A_n j_n(k0 r) P_n.
  Vec3 axis;
  std::vector<cd> A(cap + 1);
  if (const auto* pw = std::get_if<SeriesPlaneWave>(&config.source)) {
    axis = pw->direction.normalized();
    cd in(1.0, 0.0);
    for (int n = 0; n <= cap; ++n) {
      A[n] = (2.0 * n + 1.0) * in;
      in *= cd(0.0, 1.0);
    }
  } else {
    const Vec3 y = std::get<SeriesPointSource>(config.source).position;
    const double d = y.norm();
    if (d <= a) throw std::invalid_argument("point source must be exterior to the sphere");
    axis = y / d;
    std::vector<cd> jd, yd;
    spherical_bessel(k0 * d, cap, jd, yd);
    for (int n = 0; n <= cap; ++n)
      A[n] = cd(0, 1) * k0 / (4.0 * pi) * (2.0 * n + 1.0) * (jd[n] + cd(0, 1) * yd[n]);
  }

  VecXc field = VecXc::Zero(eval_points.rows());
  std::vector<cd> jr, yr;
  std::vector<double> P(cap + 1);
  for (Eigen::Index p = 0; p < eval_points.rows(); ++p) {
    const Vec3 x = eval_points.row(p).transpose();
    const double r = x.norm();
    if (r < a) throw std::invalid_argument("evaluation point inside the sphere");
    const double ct = std::clamp(axis.dot(x) / r, -1.0, 1.0);
    spherical_bessel(k0 * r, cap, jr, yr);

    P[0] = 1.0;
    if (cap >= 1) P[1] = ct;
    for (int n = 1; n < cap; ++n)
      P[n + 1] = ((2.0 * n + 1.0) * ct * P[n] - n * P[n - 1]) / (n + 1.0);

    cd sum = 0.0;
    int quiet = 0;
    bool converged = false;
    for (int n = 0; n <= cap; ++n) {
      const cd hn = jr[n] + cd(0, 1) * yr[n];
      const cd term = A[n] * b[n] * hn * P[n];
      sum += term;
      if (std::abs(term) < 1e-10 * std::max(1e-300, std::abs(sum)))
        ++quiet;
      else
        quiet = 0;
      if (quiet >= 5) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("sphere series did not converge at order cap");
    field(p) = sum;
  }
  return field;
}

VecX fd_gradient(const std::function<double(const VecX&)>& f, const VecX& m, double h) {
  if (h <= 0.0) throw std::invalid_argument("fd step must be > 0");
  VecX g(m.size());
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    VecX mp = m, mm = m;
    mp(j) += h;
    mm(j) -= h;
    g(j) = (f(mp) - f(mm)) / (2.0 * h);
  }
  return g;
}

namespace {

double tv_smooth(const VecX& x, int nx, int ny, double eps, VecX* grad) {
  double val = 0.0;
  if (grad) grad->setZero();
  auto id = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double gx = i + 1 < nx ? x(id(i + 1, j)) - x(id(i, j)) : 0.0;
      const double gy = j + 1 < ny ? x(id(i, j + 1)) - x(id(i, j)) : 0.0;
      const double mag = std::sqrt(gx * gx + gy * gy + eps * eps);
      val += mag - eps;
      if (grad) {
        if (i + 1 < nx) {
          (*grad)(id(i + 1, j)) += gx / mag;
          (*grad)(id(i, j)) -= gx / mag;
        }
        if (j + 1 < ny) {
          (*grad)(id(i, j + 1)) += gy / mag;
          (*grad)(id(i, j)) -= gy / mag;
        }
      }
    }
  return val;
}

double tv_smooth_hessian(const VecX& x, int nx, int ny, double eps, MatX& H) {
  // Assemble the exact Hessian of the smoothed TV by accumulating per-term
  // 2x2 (or larger) contributions through the difference stencils.
  H.setZero();
  auto id = [&](int i, int j) { return j * nx + i; };
  double val = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const bool hx = i + 1 < nx, hy = j + 1 < ny;
      const double gx = hx ? x(id(i + 1, j)) - x(id(i, j)) : 0.0;
      const double gy = hy ? x(id(i, j + 1)) - x(id(i, j)) : 0.0;
      const double m2 = gx * gx + gy * gy + eps * eps;
      const double mag = std::sqrt(m2);
      val += mag - eps;
      const double s = 1.0 / mag;
      const double hxx = s * (1.0 - gx * gx / m2);
      const double hyy = s * (1.0 - gy * gy / m2);
      const double hxy = -s * gx * gy / m2;
      // derivative of gx wrt x(i+1,j) is +1, wrt x(i,j) is -1 (same for gy)
      auto add = [&](int a, double sa, int bq, double sb, double h2) {
        H(a, bq) += sa * sb * h2;
      };
      const int px = id(i, j);
      if (hx) {
        add(id(i + 1, j), 1, id(i + 1, j), 1, hxx);
        add(id(i + 1, j), 1, px, -1, hxx);
        add(px, -1, id(i + 1, j), 1, hxx);
        add(px, -1, px, -1, hxx);
      }
      if (hy) {
        add(id(i, j + 1), 1, id(i, j + 1), 1, hyy);
        add(id(i, j + 1), 1, px, -1, hyy);
        add(px, -1, id(i, j + 1), 1, hyy);
        add(px, -1, px, -1, hyy);
      }
      if (hx && hy) {
        const int qx = id(i + 1, j), qy = id(i, j + 1);
        add(qx, 1, qy, 1, hxy);
        add(qx, 1, px, -1, hxy);
        add(px, -1, qy, 1, hxy);
        add(px, -1, px, -1, hxy);
        add(qy, 1, qx, 1, hxy);
        add(qy, 1, px, -1, hxy);
        add(px, -1, qx, 1, hxy);
        add(px, -1, px, -1, hxy);
      }
    }
  return val;
}

double l1_smooth(const VecX& x, double eps, VecX* grad, MatX* H) {
  double val = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double m = std::sqrt(x(i) * x(i) + eps * eps);
    val += m - eps;
    if (grad) (*grad)(i) = x(i) / m;
    if (H) (*H)(i, i) = eps * eps / (m * m * m);
  }
  return val;
}

}  // namespace

double prox_objective(const VecX& x, const VecX& y, int nx, int ny, double tau, ProxKind kind) {
  double reg = 0.0;
  if (kind == ProxKind::l1) {
    reg = x.array().abs().sum();
  } else {
    auto id = [&](int i, int j) { return j * nx + i; };
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double gx = i + 1 < nx ? x(id(i + 1, j)) - x(id(i, j)) : 0.0;
        const double gy = j + 1 < ny ? x(id(i, j + 1)) - x(id(i, j)) : 0.0;
        reg += std::sqrt(gx * gx + gy * gy);
      }
  }
  return 0.5 * (x - y).squaredNorm() + tau * reg;
}

VecX prox_bruteforce(const VecX& y, int nx, int ny, double tau, ProxKind kind) {
  if (y.size() > 9) throw std::invalid_argument("prox_bruteforce limited to 9 unknowns");
  if (nx * ny != y.size()) throw std::invalid_argument("grid dims mismatch");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  if (tau == 0.0) return y;

  const int n = static_cast<int>(y.size());
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  // restart points: the data, zero, soft-thresholded data, random jitters
  std::vector<VecX> starts = {y, VecX::Zero(n)};
  {
    VecX soft(n);
    for (int i = 0; i < n; ++i)
      soft(i) = std::copysign(std::max(std::abs(y(i)) - tau, 0.0), y(i));
    starts.push_back(soft);
    for (int r = 0; r < 3; ++r) {
      VecX j = y;
      for (int i = 0; i < n; ++i) j(i) += 0.25 * tau * unif(rng);
      starts.push_back(j);
    }
  }

  VecX best;
  double best_obj = std::numeric_limits<double>::infinity();
  VecX grad(n), g2(n);
  MatX Hreg(n, n), H(n, n);

  for (const VecX& x0 : starts) {
    VecX x = x0;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
      for (int it = 0; it < 200; ++it) {
        double reg;
        if (kind == ProxKind::tv) {
          reg = tv_smooth_hessian(x, nx, ny, eps, Hreg);
          tv_smooth(x, nx, ny, eps, &grad);
        } else {
          Hreg.setZero();
          reg = l1_smooth(x, eps, &grad, &Hreg);
        }
        (void)reg;
        VecX g = (x - y) + tau * grad;
        H = MatX::Identity(n, n) + tau * Hreg;
        VecX step = H.ldlt().solve(g);
        // backtracking on the smoothed objective
        auto feps = [&](const VecX& z) {
          const double r = kind == ProxKind::tv ? tv_smooth(z, nx, ny, eps, nullptr)
                                                : l1_smooth(z, eps, nullptr, nullptr);
          return 0.5 * (z - y).squaredNorm() + tau * r;
        };
        const double f0 = feps(x);
        double t = 1.0;
        VecX xn = x - t * step;
        while (feps(xn) > f0 - 1e-4 * t * g.dot(step) && t > 1e-12) {
          t *= 0.5;
          xn = x - t * step;
        }
        const double drop = f0 - feps(xn);
        x = xn;
        if (std::abs(drop) < 1e-15 * std::max(1.0, f0)) break;
      }
    }
    const double obj = prox_objective(x, y, nx, ny, tau, kind);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

}  // namespace twsar::oracle
