#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "carnot/fields.hpp"
#include "carnot/group.hpp"
#include "carnot/spacetime.hpp"

namespace carnot {

/// Piecewise-constant-in-time symmetric q x q coefficient path with a
/// certified two-sided spectral bound [nu, 1/nu].
struct CoefficientPath {
  std::vector<double> breakpoints;        // 0 = b_0 < ... < b_P = T
  std::vector<Eigen::MatrixXd> matrices;  // one per interval
  double nu = 1.0;

  void validate() const;  // symmetry and spectrum checks
  double horizon() const { return breakpoints.back(); }
  const Eigen::MatrixXd& value_at(double t) const;
  /// For q = 1: exact integral of the scalar coefficient over [0, t].
  double scalar_integral(double t) const;

  static CoefficientPath constant(int q, double T, const Eigen::MatrixXd& a, double nu);
};

/// n_pieces independent SPD matrices with eigenvalues drawn uniformly in
/// [nu, 1/nu]; reproducible from the seed.
CoefficientPath random_coefficient_path(int q, double nu, int n_pieces, uint64_t seed,
                                        double T);

enum class Scheme { ExplicitEuler, ImplicitEuler };

struct SolverConfig {
  Scheme scheme = Scheme::ImplicitEuler;
  double dt = 0.0;
  double T = 0.0;
  double cfl_safety = 0.9;
  double cg_tol = 1e-10;  // relative residual for the inner conjugate-gradient solve
  int cg_max_iter = 5000;
  int stencil_order = 2;
  int store_stride = 1;   // keep every stride-th frame (plus the final one)
};

struct CflError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InnerSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-run diagnostics accumulated over all steps (right-endpoint time
/// quadrature, matching the scheme).
struct SolveStats {
  double st_u = 0.0;        // ||u||_{L2(G_T)}
  double st_F = 0.0;        // ||F||
  double st_grad_sq = 0.0;  // ||grad_X u||^2
  double form_q = 0.0;      // sum_ij int a_ij X_i u X_j u
  double final_sq = 0.0;    // 0.5 ||u(T)||^2
  double jump_sq = 0.0;     // 0.5 sum_n ||u_n - u_{n-1}||^2
  double lhs_energy = 0.0;  // -int int u F
  double max_linf = 0.0;
  double max_residual = 0.0;  // max_n || -D_t u + A u - F || (scheme-consistent)
  long cg_iterations = 0;
};

struct SolveResult {
  SpaceTimeField field;
  SolveStats stats;
};

using StepObserver = std::function<void(int n, double t, const GridFunction& u)>;

/// One step of the scheme from u_n at t_n; forcing evaluated per the scheme
/// (explicit: t_n, implicit: t_{n+1}), coefficients at the interval midpoint.
GridFunction step(const GroupSpec& spec, const SolverConfig& config,
                  const CoefficientPath& path, const GridFunction& u_n, double t_n,
                  const SpaceTimeFn& forcing);

/// Time-step -u_t + sum a_ij(t) X_i X_j u = F from u(0,.) = 0.
SolveResult solve(const GroupSpec& spec, const SolverConfig& config,
                  const CoefficientPath& path, const SpaceTimeFn& forcing,
                  const Lattice& lat, const StepObserver& observer = nullptr);

/// |  -int int u F  -  ( 0.5||u(T)||^2 + sum_ij int a_ij X_i u X_j u )  |
/// computed from stored frames (stride-1 field required).
double energy_identity_residual(const GroupSpec& spec, const CoefficientPath& path,
                                const SpaceTimeField& u, const SpaceTimeFn& forcing,
                                int order = 2);

struct EnergyCheck {
  double ratio = 0.0;  // ||grad_X u||^2 / (nu^-1 ||F|| ||u||)
  bool degenerate = false;
};

EnergyCheck energy_estimate_check(const GroupSpec& spec, const CoefficientPath& path,
                                  const SpaceTimeField& u, const SpaceTimeFn& forcing,
                                  int order = 2);

/// Max over a seeded battery of smooth test functions phi of the worst
/// per-step defect |<-D_t u, phi> + sum a_ij <u, X_i X_j phi> - <F, phi>|,
/// normalized by ||phi||.
double weak_form_battery_residual(const GroupSpec& spec, const CoefficientPath& path,
                                  const SpaceTimeField& u, const SpaceTimeFn& forcing,
                                  uint64_t seed, int n_test = 10, int order = 2);

/// Per-frame binary arrays plus a manifest (dt, T, lattice, breakpoints, seed).
void save_trajectory(const SpaceTimeField& field, const CoefficientPath& path,
                     uint64_t seed, const std::string& dir);

}  // namespace carnot
