#include "carnot/difference.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "carnot/fields.hpp"

namespace carnot {

SpaceTimeField SpaceTimeField::sample(const Lattice& lat, double T, int steps,
                                      const SpaceTimeFn& f) {
  SpaceTimeField out;
  out.lat = lat;
  out.T = T;
  out.dt = T / steps;
  out.frames.reserve(steps + 1);
  for (int n = 0; n <= steps; ++n) {
    double t = out.dt * n;
    out.frames.push_back(GridFunction::sample(
        lat, [&](std::span<const double> x) { return f(t, x); }));
  }
  return out;
}

double st_l2(const SpaceTimeField& f) {
  double acc = 0.0;
  for (std::size_t n = 1; n < f.frames.size(); ++n) {
    double nm = l2_norm(f.frames[n]);
    acc += nm * nm;
  }
  return std::sqrt(acc * f.dt);
}

double st_inner(const SpaceTimeField& f, const SpaceTimeField& g) {
  assert(f.frames.size() == g.frames.size());
  double acc = 0.0;
  for (std::size_t n = 1; n < f.frames.size(); ++n) acc += inner(f.frames[n], g.frames[n]);
  return acc * f.dt;
}

SpaceTimeField st_map(const SpaceTimeField& f,
                      const std::function<GridFunction(const GridFunction&)>& op) {
  SpaceTimeField out = f;
  for (auto& fr : out.frames) fr = op(fr);
  return out;
}

SpaceTimeField st_axpy(double a, const SpaceTimeField& x, const SpaceTimeField& y) {
  assert(x.frames.size() == y.frames.size());
  SpaceTimeField out = y;
  for (std::size_t n = 0; n < out.frames.size(); ++n) out.frames[n].axpy(a, x.frames[n]);
  return out;
}

Increment make_increment(const GroupSpec& spec, DeltaSide side, int direction, double t) {
  Increment inc;
  inc.direction = direction;
  inc.t = t;
  inc.side = side;
  inc.h = exp_generator(spec, direction, t);
  return inc;
}

namespace {

double interp_zero_ext(const GridFunction& f, std::span<const double> x) {
  for (int k = 0; k < f.lat.dim(); ++k)
    if (x[k] < -f.lat.half_width[k] || x[k] >= f.lat.half_width[k]) return 0.0;
  return interpolate(f, x);
}

/// Per-axis reach of the translated support, sampled at box corners plus a
/// seeded interior sample (cf. convolution.cpp).
bool translate_fits(const GroupSpec& spec, DeltaSide side,
                    const std::vector<double>& data_box, const Coords& h,
                    const Lattice& lat) {
  const int N = spec.N;
  Coords z(N);
  std::vector<double> reach(N, 0.0);
  auto consider = [&]() {
    Coords p = side == DeltaSide::Right ? multiply(spec, z, inverse(spec, h))
                                        : multiply(spec, inverse(spec, h), z);
    for (int k = 0; k < N; ++k) reach[k] = std::max(reach[k], std::abs(p[k]));
  };
  for (int c = 0; c < (1 << N); ++c) {
    for (int k = 0; k < N; ++k) z[k] = ((c >> k) & 1) ? data_box[k] : -data_box[k];
    consider();
  }
  Rng rng(0x64656c7461ULL);
  for (int s = 0; s < 128; ++s) {
    for (int k = 0; k < N; ++k) z[k] = rng.uniform(-data_box[k], data_box[k]);
    consider();
  }
  for (int k = 0; k < N; ++k)
    if (1.02 * reach[k] + lat.h[k] > lat.half_width[k]) return false;
  return true;
}

}  // namespace

GridFunction delta(DeltaSide side, const GroupSpec& spec, const Coords& h,
                   const GridFunction& f) {
  const Lattice& lat = f.lat;
  SupportInfo sup = support_info(spec, f);
  if (sup.empty) return GridFunction(lat);
  const bool periodic_data = sup.full_box;
  if (!periodic_data && !translate_fits(spec, side, sup.box_half_width, h, lat))
    throw SupportError("delta: translated support leaves the safe region");

  GridFunction out(lat);
  std::vector<double> x(lat.dim());
  Coords p;
  for (std::size_t i = 0; i < lat.size; ++i) {
    lat.point(i, x);
    Coords xc(x.begin(), x.end());
    p = side == DeltaSide::Right ? multiply(spec, xc, h) : multiply(spec, h, xc);
    double fx = periodic_data ? interpolate(f, p) : interp_zero_ext(f, p);
    out.v[i] = fx - f.v[i];
  }
  return out;
}

GridFunction delta_power(DeltaSide side, const GroupSpec& spec, const Coords& h, int m,
                         const GridFunction& f) {
  if (m < 1) throw std::invalid_argument("delta_power: m must be >= 1");
  GridFunction out = delta(side, spec, h, f);
  for (int j = 1; j < m; ++j) out = delta(side, spec, h, out);
  return out;
}

SpaceTimeField delta_power(DeltaSide side, const GroupSpec& spec, const Coords& h, int m,
                           const SpaceTimeField& f) {
  return st_map(f, [&](const GridFunction& fr) { return delta_power(side, spec, h, m, fr); });
}

SeminormReport seminorm(DeltaSide side, const GroupSpec& spec, int m, double alpha,
                        const SpaceTimeField& f, const SeminormOptions& opts) {
  SeminormReport rep;
  rep.side = side;
  rep.m = m;
  rep.alpha = alpha;
  if (m == 0) {  // |f|_0 = |f|_0^R = ||f||
    rep.value = st_l2(f);
    return rep;
  }
  double t_min = opts.t_min;
  if (t_min <= 0.0) {
    double coarsest = 0.0;
    for (double hk : f.lat.h) coarsest = std::max(coarsest, hk);
    t_min = 2.0 * coarsest;
  }
  rep.t_min = t_min;
  const int half = std::max(1, opts.points_per_direction / 2);
  if (t_min >= opts.t_max) throw std::invalid_argument("seminorm: empty t grid");
  const double ratio = std::pow(opts.t_max / t_min, 1.0 / std::max(1, half - 1));
  for (int i = 1; i <= spec.q; ++i) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      double tv = t_min;
      for (int p = 0; p < half; ++p, tv *= ratio) {
        double t = sgn * tv;
        Coords h = exp_generator(spec, i, t);
        double hn = hom_norm(spec, h);
        if (hn > opts.t_max * (1.0 + 1e-12)) continue;
        SpaceTimeField d;
        try {
          d = delta_power(side, spec, h, m, f);
        } catch (const SupportError&) {
          rep.restricted = true;
          continue;
        }
        rep.t_max_effective = std::max(rep.t_max_effective, std::abs(t));
        double val = st_l2(d) / std::pow(hn, alpha);
        if (val > rep.value) {
          rep.value = val;
          rep.argmax_direction = i;
          rep.argmax_t = t;
        }
      }
    }
  }
  rep.tmin_attained = std::abs(std::abs(rep.argmax_t) - t_min) < 1e-12;
  return rep;
}

namespace {

void composed_norms(FieldKind kind, const GroupSpec& spec, int k, const SpaceTimeField& u,
                    int order, double* sum_all, double* grad_sq) {
  // BFS over derivative words of length <= k, frame by frame
  double total = 0.0;     // sum over words of ST norms
  double grad2 = 0.0;     // sum_i ||X_i u||^2
  std::vector<SpaceTimeField> level;  // current derivative level
  level.push_back(u);
  for (int depth = 1; depth <= k; ++depth) {
    std::vector<SpaceTimeField> next;
    for (const auto& w : level)
      for (int i = 1; i <= spec.q; ++i) {
        SpaceTimeField d = st_map(w, [&](const GridFunction& fr) {
          return apply_field(spec, kind, i, fr, order);
        });
        double nm = st_l2(d);
        total += nm;
        if (depth == 1) grad2 += nm * nm;
        next.push_back(std::move(d));
      }
    level = std::move(next);
  }
  if (sum_all) *sum_all = total;
  if (grad_sq) *grad_sq = grad2;
}

}  // namespace

double sobolev_norm(FieldKind kind, const GroupSpec& spec, int k, const SpaceTimeField& u,
                    int order) {
  if (k < 0) throw std::invalid_argument("sobolev_norm: k must be >= 0");
  double sum = 0.0;
  if (k > 0) composed_norms(kind, spec, k, u, order, &sum, nullptr);
  return st_l2(u) + sum;
}

double horizontal_gradient_norm(FieldKind kind, const GroupSpec& spec,
                                const SpaceTimeField& u, int order) {
  double g2 = 0.0;
  composed_norms(kind, spec, 1, u, order, nullptr, &g2);
  return std::sqrt(g2);
}

EquivalenceRatios equivalence_ratio(DeltaSide side, const GroupSpec& spec, int m,
                                    const SpaceTimeField& u, const SeminormOptions& opts) {
  EquivalenceRatios out;
  double l2 = st_l2(u);
  if (l2 == 0.0) {
    out.degenerate = true;  // 0/0 -> 0 by convention
    return out;
  }
  double sum_semi = 0.0;
  for (int k = 0; k <= m; ++k) sum_semi += seminorm(side, spec, k, k, u, opts).value;
  double wm = sobolev_norm(sobolev_kind(side), spec, m, u);
  out.seminorm_over_sobolev = sum_semi / wm;
  double s1 = seminorm(side, spec, 1, 1, u, opts).value;
  double grad = horizontal_gradient_norm(sobolev_kind(side), spec, u);
  out.gradient_over_first = s1 > 0.0 ? grad / s1 : 0.0;
  return out;
}

double marchaud_ratio(const GroupSpec& spec, const SpaceTimeField& u, int m, double eps,
                      const SeminormOptions& opts) {
  double num = seminorm(DeltaSide::Left, spec, 1, 1, u, opts).value;
  double den = seminorm(DeltaSide::Left, spec, m, 1.0 + eps, u, opts).value + st_l2(u);
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace carnot
