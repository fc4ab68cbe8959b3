#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "carnot/group.hpp"

namespace carnot {

/// Smooth function with closed-form first and second partials; the exact
/// side of manufactured-solution and stencil-consistency oracles.
struct AnalyticFn {
  std::function<double(std::span<const double>)> value;
  std::function<double(int, std::span<const double>)> d1;
  std::function<double(int, int, std::span<const double>)> d2;
};

/// Product bump Pi_k (1 - (x_k/r_k)^2)^p, compactly supported in the box
/// Pi [-r_k, r_k]; C^(p-1).
AnalyticFn separable_bump(std::vector<double> radii, int p = 4, double amplitude = 1.0);

/// cos(k . x + phase).
AnalyticFn trig_mode(std::vector<double> wave, double phase, double amplitude = 1.0);

AnalyticFn sum(std::vector<AnalyticFn> parts);
AnalyticFn product(AnalyticFn a, AnalyticFn b);

/// Exact (X_i f)(x) for a left or right invariant generator.
double field_value(const GroupSpec& spec, FieldKind kind, int i, const AnalyticFn& f,
                   std::span<const double> x);

/// Exact (X_i X_j f)(x):
/// sum_kl b_ik (d_k b_jl) d_l f + b_ik b_jl d_k d_l f.
double second_order_value(const GroupSpec& spec, int i, int j, const AnalyticFn& f,
                          std::span<const double> x);

// ---- small fit utilities ------------------------------------------------------

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n = 0;
};

/// Ordinary least squares y = slope * x + intercept.
FitResult ols(std::span<const double> x, std::span<const double> y);

/// OLS on (log x, log y); pairs with nonpositive entries are skipped.
FitResult loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace carnot
