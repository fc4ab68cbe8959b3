#include "carnot/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cassert>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace carnot {

using json = nlohmann::ordered_json;

void CoefficientPath::validate() const {
  if (breakpoints.size() != matrices.size() + 1 || matrices.empty())
    throw std::invalid_argument("coefficient path: breakpoint/matrix count");
  if (!(nu > 0.0 && nu <= 1.0))
    throw std::domain_error("coefficient path: nu must be in (0, 1]");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw std::invalid_argument("coefficient path: breakpoints not increasing");
  const double tol = 1e-12;
  for (const auto& a : matrices) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("coefficient path: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo < nu - 1e-9 || hi > 1.0 / nu + 1e-9)
      throw std::invalid_argument("coefficient path: spectrum outside [nu, 1/nu]");
  }
}

const Eigen::MatrixXd& CoefficientPath::value_at(double t) const {
  // half-open intervals [b_i, b_{i+1}); t = T falls in the last piece
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  std::size_t i = it == breakpoints.begin() ? 0 : (it - breakpoints.begin()) - 1;
  if (i >= matrices.size()) i = matrices.size() - 1;
  return matrices[i];
}

double CoefficientPath::scalar_integral(double t) const {
  if (matrices[0].rows() != 1)
    throw std::invalid_argument("scalar_integral: path is not scalar");
  double acc = 0.0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    double a = breakpoints[i], b = breakpoints[i + 1];
    if (t <= a) break;
    acc += matrices[i](0, 0) * (std::min(t, b) - a);
  }
  return acc;
}

CoefficientPath CoefficientPath::constant(int q, double T, const Eigen::MatrixXd& a,
                                          double nu) {
  CoefficientPath p;
  p.breakpoints = {0.0, T};
  p.matrices = {a};
  p.nu = nu;
  p.validate();
  return p;
}

CoefficientPath random_coefficient_path(int q, double nu, int n_pieces, uint64_t seed,
                                        double T) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::domain_error("nu must be in (0, 1]");
  if (n_pieces < 1 || q < 1) throw std::invalid_argument("bad path shape");
  CoefficientPath path;
  path.nu = nu;
  path.breakpoints.resize(n_pieces + 1);
  for (int i = 0; i <= n_pieces; ++i) path.breakpoints[i] = T * i / n_pieces;
  Rng rng(mix_seed(seed, 0x70617468ULL));
  for (int p = 0; p < n_pieces; ++p) {
    Eigen::MatrixXd a;
    if (nu == 1.0) {
      a = Eigen::MatrixXd::Identity(q, q);
    } else if (q == 1) {
      a = Eigen::MatrixXd::Constant(1, 1, rng.uniform(nu, 1.0 / nu));
    } else {
      Eigen::VectorXd lambda(q);
      for (int i = 0; i < q; ++i) lambda(i) = rng.uniform(nu, 1.0 / nu);
      Eigen::MatrixXd g(q, q);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) g(i, j) = rng.normal();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      Eigen::MatrixXd qm = qr.householderQ();
      Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int i = 0; i < q; ++i)
        if (r(i, i) < 0) qm.col(i) *= -1.0;
      a = qm * lambda.asDiagonal() * qm.transpose();
      a = 0.5 * (a + a.transpose());  // exact symmetry
    }
    path.matrices.push_back(std::move(a));
  }
  path.validate();
  return path;
}

// ---- stepping ----------------------------------------------------------------

namespace {

struct Stepper {
  const GroupSpec& spec;
  const SolverConfig& cfg;
  const CoefficientPath& path;
  FieldTable table;
  std::vector<GridFunction> scratch;
  GridFunction r, p, ap;
  double explicit_amp = 0.0;

  Stepper(const GroupSpec& s, const SolverConfig& c, const CoefficientPath& pa,
          const Lattice& lat)
      : spec(s), cfg(c), path(pa), table(s, lat, c.stencil_order) {
    if (cfg.scheme == Scheme::ExplicitEuler) {
      // amplification bound: |A u|_inf <= amp ||u||_inf with
      // amp = sum_ij |a_ij|_max amp_i amp_j, amp_i = sum_k sup|b_ik| / h_k
      std::vector<double> amp(spec.q, 0.0);
      for (int i = 0; i < spec.q; ++i)
        for (int k = 0; k < spec.N; ++k) {
          const Polynomial& b = spec.left_fields[i][k];
          if (b.is_zero()) continue;
          amp[i] += b.sup_bound(lat.half_width) / lat.h[k];
        }
      double worst = 0.0;
      for (const auto& a : path.matrices) {
        double v = 0.0;
        for (int i = 0; i < spec.q; ++i)
          for (int j = 0; j < spec.q; ++j) v += std::abs(a(i, j)) * amp[i] * amp[j];
        worst = std::max(worst, v);
      }
      explicit_amp = worst;
    }
  }

  void apply_a(const Eigen::MatrixXd& a, const GridFunction& in, GridFunction& out) {
    table.a_form(a, in, out, scratch);
  }

  /// u_next solves (I - dt A) u_next = rhs by plain conjugate gradients
  /// (the discrete operator is symmetric negative semidefinite).
  long cg_solve(const Eigen::MatrixXd& a, const GridFunction& rhs, GridFunction& u) {
    const double dt = cfg.dt;
    auto op = [&](const GridFunction& x, GridFunction& out) {
      apply_a(a, x, out);
      out *= -dt;
      out += x;
    };
    double b_norm = l2_norm(rhs);
    if (b_norm == 0.0) {
      std::fill(u.v.begin(), u.v.end(), 0.0);
      return 0;
    }
    op(u, ap);
    r = rhs;
    r -= ap;
    p = r;
    double rr = inner(r, r);
    const double tol = cfg.cg_tol * b_norm;
    long iters = 0;
    while (std::sqrt(rr) > tol) {
      if (iters >= cfg.cg_max_iter)
        throw InnerSolveError("implicit step: conjugate-gradient solve did not converge");
      op(p, ap);
      double pap = inner(p, ap);
      double alpha = rr / pap;
      u.axpy(alpha, p);
      r.axpy(-alpha, ap);
      double rr_new = inner(r, r);
      double beta = rr_new / rr;
      rr = rr_new;
      GridFunction& pn = ap;  // reuse storage
      pn = r;
      pn.axpy(beta, p);
      std::swap(p, pn);
      ++iters;
    }
    return iters;
  }

  GridFunction sample_forcing(const SpaceTimeFn& forcing, double t) {
    return GridFunction::sample(table.lattice(), [&](std::span<const double> x) {
      return forcing(t, x);
    });
  }

  /// Advance one step; fills u_next, returns CG iterations (0 for explicit).
  long advance(const GridFunction& u_n, double t_n, const SpaceTimeFn& forcing,
               GridFunction& u_next, GridFunction* f_used) {
    const double dt = cfg.dt;
    const Eigen::MatrixXd& a = path.value_at(t_n + 0.5 * dt);
    if (cfg.scheme == Scheme::ExplicitEuler) {
      if (dt * explicit_amp > 2.0 * cfg.cfl_safety)
        throw CflError("explicit step violates the CFL bound");
      GridFunction f = sample_forcing(forcing, t_n);
      apply_a(a, u_n, u_next);
      u_next -= f;
      u_next *= dt;
      u_next += u_n;
      if (f_used) *f_used = std::move(f);
      return 0;
    }
    GridFunction f = sample_forcing(forcing, t_n + dt);
    GridFunction rhs = u_n;
    rhs.axpy(-dt, f);
    if (u_next.v.size() != u_n.v.size()) u_next = u_n;  // warm start
    long it = cg_solve(a, rhs, u_next);
    if (f_used) *f_used = std::move(f);
    return it;
  }
};

}  // namespace

GridFunction step(const GroupSpec& spec, const SolverConfig& config,
                  const CoefficientPath& path, const GridFunction& u_n, double t_n,
                  const SpaceTimeFn& forcing) {
  Stepper st(spec, config, path, u_n.lat);
  GridFunction u_next = u_n;
  st.advance(u_n, t_n, forcing, u_next, nullptr);
  return u_next;
}

SolveResult solve(const GroupSpec& spec, const SolverConfig& config,
                  const CoefficientPath& path, const SpaceTimeFn& forcing,
                  const Lattice& lat, const StepObserver& observer) {
  if (!(config.dt > 0.0 && config.T > 0.0))
    throw std::invalid_argument("solve: dt and T must be positive");
  const int M = static_cast<int>(std::llround(config.T / config.dt));
  if (std::abs(M * config.dt - config.T) > 1e-9 * config.T)
    throw std::invalid_argument("solve: T must be a multiple of dt");
  if (std::abs(path.horizon() - config.T) > 1e-9 * config.T)
    throw std::invalid_argument("solve: coefficient path horizon != T");
  for (double b : path.breakpoints) {
    double steps = b / config.dt;
    if (std::abs(steps - std::llround(steps)) > 1e-9)
      throw std::invalid_argument("solve: coefficient breakpoints must align with steps");
  }

  Stepper st(spec, config, path, lat);
  SolveResult res;
  res.field.lat = lat;
  res.field.T = config.T;
  res.field.dt = config.dt * config.store_stride;
  res.field.frames.push_back(GridFunction(lat));  // u(0,.) = 0

  GridFunction u(lat), u_next(lat), f_used(lat);
  GridFunction xg(lat);
  SolveStats& stats = res.stats;
  double acc_u = 0.0, acc_F = 0.0;

  for (int n = 0; n < M; ++n) {
    const double t_n = n * config.dt;
    stats.cg_iterations += st.advance(u, t_n, forcing, u_next, &f_used);

    const Eigen::MatrixXd& a = path.value_at(t_n + 0.5 * config.dt);
    // scheme-consistent residual: -D_t u + A u - F at the scheme's stencil
    {
      GridFunction resid(lat);
      st.apply_a(a, config.scheme == Scheme::ExplicitEuler ? u : u_next, resid);
      resid.axpy(-1.0 / config.dt, u_next);
      resid.axpy(1.0 / config.dt, u);
      resid -= f_used;
      stats.max_residual = std::max(stats.max_residual, l2_norm(resid));
    }

    // energy bookkeeping at the right endpoint
    {
      double un2 = inner(u_next, u_next);
      acc_u += un2;
      acc_F += inner(f_used, f_used);
      stats.lhs_energy -= config.dt * inner(u_next, f_used);
      GridFunction jump = u_next;
      jump -= u;
      stats.jump_sq += 0.5 * inner(jump, jump);
      // gradient and quadratic form
      std::vector<GridFunction> grads;
      for (int i = 1; i <= spec.q; ++i) {
        st.table.apply(FieldKind::Left, i, u_next, xg);
        stats.st_grad_sq += config.dt * inner(xg, xg);
        grads.push_back(xg);
      }
      for (int i = 0; i < spec.q; ++i)
        for (int j = 0; j < spec.q; ++j)
          if (a(i, j) != 0.0)
            stats.form_q += config.dt * a(i, j) * inner(grads[i], grads[j]);
      stats.max_linf = std::max(stats.max_linf, u_next.max_abs());
      if (n == M - 1) stats.final_sq = 0.5 * un2;
    }

    std::swap(u, u_next);
    if (observer) observer(n + 1, t_n + config.dt, u);
    if ((n + 1) % config.store_stride == 0 || n + 1 == M)
      res.field.frames.push_back(u);
  }
  stats.st_u = std::sqrt(acc_u * config.dt);
  stats.st_F = std::sqrt(acc_F * config.dt);
  return res;
}

double energy_identity_residual(const GroupSpec& spec, const CoefficientPath& path,
                                const SpaceTimeField& u, const SpaceTimeFn& forcing,
                                int order) {
  const int M = u.steps();
  double lhs = 0.0, form = 0.0;
  for (int n = 1; n <= M; ++n) {
    double t = u.time(n);
    GridFunction f = GridFunction::sample(
        u.lat, [&](std::span<const double> x) { return forcing(t, x); });
    lhs -= u.dt * inner(u.frames[n], f);
    const Eigen::MatrixXd& a = path.value_at(t - 0.5 * u.dt);
    std::vector<GridFunction> grads;
    for (int i = 1; i <= spec.q; ++i)
      grads.push_back(apply_field(spec, FieldKind::Left, i, u.frames[n], order));
    for (int i = 0; i < spec.q; ++i)
      for (int j = 0; j < spec.q; ++j)
        if (a(i, j) != 0.0) form += u.dt * a(i, j) * inner(grads[i], grads[j]);
  }
  double final_sq = 0.5 * inner(u.frames[M], u.frames[M]);
  return std::abs(lhs - (final_sq + form));
}

EnergyCheck energy_estimate_check(const GroupSpec& spec, const CoefficientPath& path,
                                  const SpaceTimeField& u, const SpaceTimeFn& forcing,
                                  int order) {
  EnergyCheck out;
  SpaceTimeField f = SpaceTimeField::sample(u.lat, u.T, u.steps(), forcing);
  double nf = st_l2(f), nu_ = st_l2(u);
  double grad_sq = 0.0;
  for (int i = 1; i <= spec.q; ++i) {
    SpaceTimeField xi = st_map(u, [&](const GridFunction& fr) {
      return apply_field(spec, FieldKind::Left, i, fr, order);
    });
    double g = st_l2(xi);
    grad_sq += g * g;
  }
  double denom = (1.0 / path.nu) * nf * nu_;
  if (denom < 1e-300) {
    out.degenerate = true;
    return out;
  }
  out.ratio = grad_sq / denom;
  return out;
}

double weak_form_battery_residual(const GroupSpec& spec, const CoefficientPath& path,
                                  const SpaceTimeField& u, const SpaceTimeFn& forcing,
                                  uint64_t seed, int n_test, int order) {
  const Lattice& lat = u.lat;
  double rad = lat.hom_radius(spec);
  double worst = 0.0;
  for (int k = 0; k < n_test; ++k) {
    Rng rng(mix_seed(seed, 0x746573746673ULL + k));
    // Gaussian bump times a low-degree polynomial, supported well inside
    Coords c(spec.N);
    for (int d = 0; d < spec.N; ++d)
      c[d] = rng.uniform(-0.2, 0.2) * lat.half_width[d];
    double sigma = rad * rng.uniform(0.12, 0.25);
    std::vector<double> lin(spec.N);
    for (int d = 0; d < spec.N; ++d) lin[d] = rng.uniform(-1.0, 1.0);
    GridFunction phi = GridFunction::sample(lat, [&](std::span<const double> x) {
      double r2 = 0.0, pl = 1.0;
      for (int d = 0; d < spec.N; ++d) {
        double z = (x[d] - c[d]) / sigma;
        r2 += z * z;
        pl += lin[d] * x[d];
      }
      return std::exp(-0.5 * r2) * pl;
    });
    double phin = l2_norm(phi);
    // A* phi with A = sum a_ij X_i X_j: (X_i X_j)^* = X_j X_i and a symmetric,
    // so pairing u against sum a_ij X_i X_j phi matches <A u, phi>.
    for (int n = 1; n <= u.steps(); ++n) {
      double t = u.time(n);
      const Eigen::MatrixXd& a = path.value_at(t - 0.5 * u.dt);
      GridFunction aphi(lat);
      for (int i = 1; i <= spec.q; ++i)
        for (int j = 1; j <= spec.q; ++j) {
          if (a(i - 1, j - 1) == 0.0) continue;
          GridFunction w = apply_second_order(spec, i, j, phi, order);
          aphi.axpy(a(i - 1, j - 1), w);
        }
      GridFunction f = GridFunction::sample(
          lat, [&](std::span<const double> x) { return forcing(t, x); });
      GridFunction dtu = u.frames[n];
      dtu -= u.frames[n - 1];
      dtu *= 1.0 / u.dt;
      double defect = -inner(dtu, phi) + inner(u.frames[n], aphi) - inner(f, phi);
      worst = std::max(worst, std::abs(defect) / phin);
    }
  }
  return worst;
}

void save_trajectory(const SpaceTimeField& field, const CoefficientPath& path,
                     uint64_t seed, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json manifest;
  manifest["dt"] = field.dt;
  manifest["T"] = field.T;
  manifest["lattice"] = {{"box", field.lat.half_width}, {"n", field.lat.n}};
  manifest["breakpoints"] = path.breakpoints;
  manifest["nu"] = path.nu;
  manifest["seed"] = seed;
  manifest["frames"] = field.frames.size();
  std::ofstream mf(dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  for (std::size_t n = 0; n < field.frames.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "/frame_%05zu", n);
    std::ofstream fb(dir + name + ".bin", std::ios::binary);
    fb.write(reinterpret_cast<const char*>(field.frames[n].v.data()),
             static_cast<std::streamsize>(field.frames[n].v.size() * sizeof(double)));
  }
}

}  // namespace carnot
