#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <variant>
#include <vector>

#include "twsar/mesh.hpp"
#include "twsar/quadrature.hpp"
#include "twsar/types.hpp"

namespace twsar {

// k = (omega/c0) sqrt(eps_r + i sigma/(omega eps0)), branch with Im(k) >= 0.
cd complex_wavenumber(double omega, double epsilon_r, double sigma);

struct QuadratureConfig {
  int singular_order = 4;   // Gauss order per dimension in the singular transforms
  int regular_points = 6;   // triangle-rule points for well-separated pairs (3 or 6)
  int potential_points = 3; // triangle-rule points for field evaluation / RHS
  double near_ratio_1 = 2.5;  // centroid distance / max diameter below which panels
  double near_ratio_2 = 1.2;  // get one / two levels of subdivision
};

enum class TraceSpaces { mixed_p1p0, all_p1 };

// Galerkin matrices of the layer operators at one wavenumber. In the mixed
// pairing the Dirichlet trace lives in continuous P1 (vertex dofs) and the
// Neumann trace in P0 (panel dofs): V is nt x nt, K is nt x nv, W is nv x nv,
// Kp = K^T, and M is the nt x nv duality mass <phi_v, chi_T>. With all_p1
// every block is nv x nv and M is the P1 mass matrix.
struct CalderonBlocks {
  MatXc V, K, Kp, W;
  MatX M;
  cd k;
  TraceSpaces spaces = TraceSpaces::mixed_p1p0;
};

CalderonBlocks assemble_calderon(const SurfaceMesh& mesh, cd k, const QuadratureConfig& quad,
                                 TraceSpaces spaces = TraceSpaces::mixed_p1p0);

// One or more disjoint closed surfaces, each with its own interior wavenumber.
struct Scene {
  std::vector<SurfaceMesh> surfaces;
  std::vector<cd> k_interior;  // one per surface
};

struct PlaneWave {
  Vec3 direction;  // unit propagation direction
};
struct PointSource {
  Vec3 position;
};
using IncidentField = std::variant<PlaneWave, PointSource>;

// Exterior Cauchy traces of the total field, P1 Dirichlet / P0 Neumann
// coefficients stacked over all scene surfaces.
struct CauchyTraces {
  VecXc dirichlet;
  VecXc neumann;
};

struct BemStats {
  static std::atomic<long> lu_factorizations;
};

// Combined-Calderon Galerkin system (A_{k0} + A_{kD}) g+ u = g+ u^in at one
// frequency, dense with an LU factorisation shared across right-hand sides.
class TransmissionSystem {
 public:
  TransmissionSystem(Scene scene, cd k0, const QuadratureConfig& quad);

  CauchyTraces solve(const IncidentField& incident) const;
  // Relative residual ||S x - b|| / ||b|| of a solved trace pair.
  double residual(const CauchyTraces& traces, const IncidentField& incident) const;

  cd k0() const { return k0_; }
  const Scene& scene() const { return scene_; }
  Eigen::Index dof_count() const { return matrix_.rows(); }
  const MatXc& matrix() const { return matrix_; }
  double condition_estimate() const;

 private:
  VecXc assemble_rhs(const IncidentField& incident) const;

  Scene scene_;
  cd k0_;
  QuadratureConfig quad_;
  Eigen::Index nv_ = 0, nt_ = 0;
  MatXc matrix_;
  Eigen::PartialPivLU<MatXc> lu_;
};

// Frequency-keyed cache of factorised systems.
class TransmissionSolver {
 public:
  TransmissionSolver(Scene scene, QuadratureConfig quad) : scene_(std::move(scene)), quad_(quad) {}

  // Builds (and caches) the system for the given exterior/interior wavenumbers.
  const TransmissionSystem& system(cd k0, const std::vector<cd>& k_interior);

 private:
  Scene scene_;
  QuadratureConfig quad_;
  std::map<std::pair<double, double>, std::unique_ptr<TransmissionSystem>> cache_;
};

enum class NearPolicy { strict, best_effort };

// Scattered field from the representation formula,
//   u_sc(x) = D(g0+ u)(x) - S(g1+ u)(x),
// which for exterior total-field traces needs no incident subtraction.
VecXc evaluate_scattered(const Scene& scene, const CauchyTraces& traces, cd k0,
                         const MatX3& points, const QuadratureConfig& quad,
                         NearPolicy policy = NearPolicy::strict);

// Scattered field at eval_points for incident G0(., source).
VecXc scattered_field_point_source(const Scene& scene, cd k0, const Vec3& source,
                                   const MatX3& eval_points, const QuadratureConfig& quad);

}  // namespace twsar
