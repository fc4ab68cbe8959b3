#include "carnot/analytic.hpp"

#include <cassert>

namespace carnot {

AnalyticFn separable_bump(std::vector<double> radii, int p, double amplitude) {
  auto r = std::make_shared<std::vector<double>>(std::move(radii));
  auto b = [p](double t) {
    double s = 1.0 - t * t;
    if (s <= 0.0) return 0.0;
    return std::pow(s, p);
  };
  auto db = [p](double t) {
    double s = 1.0 - t * t;
    if (s <= 0.0) return 0.0;
    return -2.0 * p * t * std::pow(s, p - 1);
  };
  auto d2b = [p](double t) {
    double s = 1.0 - t * t;
    if (s <= 0.0) return 0.0;
    return -2.0 * p * std::pow(s, p - 1) + 4.0 * p * (p - 1) * t * t * std::pow(s, p - 2);
  };
  AnalyticFn f;
  f.value = [r, b, amplitude](std::span<const double> x) {
    double v = amplitude;
    for (std::size_t k = 0; k < r->size(); ++k) v *= b(x[k] / (*r)[k]);
    return v;
  };
  f.d1 = [r, b, db, amplitude](int i, std::span<const double> x) {
    double v = amplitude;
    for (std::size_t k = 0; k < r->size(); ++k) {
      double t = x[k] / (*r)[k];
      v *= static_cast<int>(k) == i ? db(t) / (*r)[k] : b(t);
    }
    return v;
  };
  f.d2 = [r, b, db, d2b, amplitude](int i, int j, std::span<const double> x) {
    double v = amplitude;
    for (std::size_t k = 0; k < r->size(); ++k) {
      double t = x[k] / (*r)[k];
      int kk = static_cast<int>(k);
      if (kk == i && kk == j)
        v *= d2b(t) / ((*r)[k] * (*r)[k]);
      else if (kk == i || kk == j)
        v *= db(t) / (*r)[k];
      else
        v *= b(t);
    }
    return v;
  };
  return f;
}

AnalyticFn trig_mode(std::vector<double> wave, double phase, double amplitude) {
  auto k = std::make_shared<std::vector<double>>(std::move(wave));
  auto arg = [k, phase](std::span<const double> x) {
    double a = phase;
    for (std::size_t d = 0; d < k->size(); ++d) a += (*k)[d] * x[d];
    return a;
  };
  AnalyticFn f;
  f.value = [arg, amplitude](std::span<const double> x) { return amplitude * std::cos(arg(x)); };
  f.d1 = [arg, k, amplitude](int i, std::span<const double> x) {
    return -amplitude * (*k)[i] * std::sin(arg(x));
  };
  f.d2 = [arg, k, amplitude](int i, int j, std::span<const double> x) {
    return -amplitude * (*k)[i] * (*k)[j] * std::cos(arg(x));
  };
  return f;
}

AnalyticFn sum(std::vector<AnalyticFn> parts) {
  auto ps = std::make_shared<std::vector<AnalyticFn>>(std::move(parts));
  AnalyticFn f;
  f.value = [ps](std::span<const double> x) {
    double v = 0.0;
    for (const auto& p : *ps) v += p.value(x);
    return v;
  };
  f.d1 = [ps](int i, std::span<const double> x) {
    double v = 0.0;
    for (const auto& p : *ps) v += p.d1(i, x);
    return v;
  };
  f.d2 = [ps](int i, int j, std::span<const double> x) {
    double v = 0.0;
    for (const auto& p : *ps) v += p.d2(i, j, x);
    return v;
  };
  return f;
}

AnalyticFn product(AnalyticFn a, AnalyticFn b) {
  auto pa = std::make_shared<AnalyticFn>(std::move(a));
  auto pb = std::make_shared<AnalyticFn>(std::move(b));
  AnalyticFn f;
  f.value = [pa, pb](std::span<const double> x) { return pa->value(x) * pb->value(x); };
  f.d1 = [pa, pb](int i, std::span<const double> x) {
    return pa->d1(i, x) * pb->value(x) + pa->value(x) * pb->d1(i, x);
  };
  f.d2 = [pa, pb](int i, int j, std::span<const double> x) {
    return pa->d2(i, j, x) * pb->value(x) + pa->d1(i, x) * pb->d1(j, x) +
           pa->d1(j, x) * pb->d1(i, x) + pa->value(x) * pb->d2(i, j, x);
  };
  return f;
}

double field_value(const GroupSpec& spec, FieldKind kind, int i, const AnalyticFn& f,
                   std::span<const double> x) {
  const auto& coeffs =
      kind == FieldKind::Left ? spec.left_fields[i - 1] : spec.right_fields[i - 1];
  double v = 0.0;
  for (int k = 0; k < spec.N; ++k)
    if (!coeffs[k].is_zero()) v += coeffs[k].eval(x) * f.d1(k, x);
  return v;
}

double second_order_value(const GroupSpec& spec, int i, int j, const AnalyticFn& f,
                          std::span<const double> x) {
  const auto& bi = spec.left_fields[i - 1];
  const auto& bj = spec.left_fields[j - 1];
  double v = 0.0;
  for (int k = 0; k < spec.N; ++k) {
    if (bi[k].is_zero()) continue;
    double bik = bi[k].eval(x);
    for (int l = 0; l < spec.N; ++l) {
      if (bj[l].is_zero()) continue;
      Polynomial dk = bj[l].derivative(k);
      if (!dk.is_zero()) v += bik * dk.eval(x) * f.d1(l, x);
      v += bik * bj[l].eval(x) * f.d2(k, l, x);
    }
  }
  return v;
}

FitResult ols(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  FitResult out;
  out.n = static_cast<int>(x.size());
  if (out.n < 2) return out;
  double sx = 0, sy = 0;
  for (int i = 0; i < out.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / out.n, my = sy / out.n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < out.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

FitResult loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return ols(lx, ly);
}

}  // namespace carnot
