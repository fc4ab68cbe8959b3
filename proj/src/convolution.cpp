#include "carnot/convolution.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace carnot {

namespace {

struct KernelPoint {
  std::vector<int> idx;
  Coords y;
  Coords y_inv;
  double weight;  // phi(y) * cell volume
};

std::vector<KernelPoint> collect_kernel(const GroupSpec& spec, const GridFunction& phi) {
  const Lattice& lat = phi.lat;
  std::vector<KernelPoint> pts;
  std::vector<int> idx(lat.dim());
  std::vector<double> x(lat.dim());
  const double vol = lat.cell_volume();
  for (std::size_t i = 0; i < lat.size; ++i) {
    if (phi.v[i] == 0.0) continue;
    lat.unravel(i, idx);
    lat.point(i, x);
    KernelPoint kp;
    kp.idx = idx;
    kp.y = Coords(x.begin(), x.end());
    kp.y_inv = inverse(spec, kp.y);
    kp.weight = phi.v[i] * vol;
    pts.push_back(std::move(kp));
  }
  return pts;
}

/// Per-axis |(y o z)_k| bound from box corners of the two supports plus a
/// seeded interior sample; exact for multilinear laws, a close estimate
/// otherwise (inflated by 2%).
std::vector<double> product_reach(const GroupSpec& spec, const std::vector<double>& ybox,
                                  const std::vector<double>& zbox) {
  const int N = spec.N;
  std::vector<double> reach(N, 0.0);
  Coords y(N), z(N);
  auto consider = [&]() {
    Coords p = multiply(spec, y, z);
    for (int k = 0; k < N; ++k) reach[k] = std::max(reach[k], std::abs(p[k]));
  };
  const int corners = 1 << N;
  for (int cy = 0; cy < corners; ++cy)
    for (int cz = 0; cz < corners; ++cz) {
      for (int k = 0; k < N; ++k) {
        y[k] = ((cy >> k) & 1) ? ybox[k] : -ybox[k];
        z[k] = ((cz >> k) & 1) ? zbox[k] : -zbox[k];
      }
      consider();
    }
  Rng rng(0x726561636830ULL);
  for (int s = 0; s < 256; ++s) {
    for (int k = 0; k < N; ++k) {
      y[k] = rng.uniform(-ybox[k], ybox[k]);
      z[k] = rng.uniform(-zbox[k], zbox[k]);
    }
    consider();
  }
  for (double& r : reach) r *= 1.02;
  return reach;
}

double interp_zero_ext(const GridFunction& f, std::span<const double> x) {
  const Lattice& lat = f.lat;
  for (int k = 0; k < lat.dim(); ++k)
    if (x[k] < -lat.half_width[k] || x[k] >= lat.half_width[k]) return 0.0;
  return interpolate(f, x);
}

/// Index window [lo, hi] (inclusive) of axis coordinates with |x| <= bound.
std::pair<int, int> axis_window(const Lattice& lat, int axis, double bound) {
  int lo = static_cast<int>(std::ceil((-bound + lat.half_width[axis]) / lat.h[axis] - 1e-12));
  int hi = static_cast<int>(std::floor((bound + lat.half_width[axis]) / lat.h[axis] + 1e-12));
  lo = std::max(lo, 0);
  hi = std::min(hi, lat.n[axis] - 1);
  return {lo, hi};
}

}  // namespace

GridFunction group_convolve(const GroupSpec& spec, const GridFunction& phi,
                            const GridFunction& u, const ConvolveOptions& opts) {
  if (!(phi.lat == u.lat))
    throw std::invalid_argument("group_convolve: kernel and data lattices differ");
  const Lattice& lat = u.lat;
  const int N = lat.dim();

  SupportInfo phi_sup = support_info(spec, phi);
  if (phi_sup.empty) return GridFunction(lat);
  if (phi_sup.full_box)
    throw SupportError("group_convolve: kernel support must be strictly inside the box");

  SupportInfo u_sup = support_info(spec, u);
  if (u_sup.empty) return GridFunction(lat);
  const bool periodic_data = u_sup.full_box;

  // Output region: everything (periodic data) or the reach of supp(phi * u).
  // An explicit mask restricts the result further and waives the overflow
  // check (the caller owns the truncation).
  std::vector<double> out_box(lat.half_width);
  if (!periodic_data) {
    std::vector<double> reach = product_reach(spec, phi_sup.box_half_width,
                                              u_sup.box_half_width);
    for (int k = 0; k < N; ++k) {
      double padded = reach[k] + lat.h[k];
      if (padded > lat.half_width[k] && !opts.output_mask)
        throw SupportError("group_convolve: support overflow, result would alias");
      out_box[k] = std::min(padded, lat.half_width[k]);
    }
  }
  if (opts.output_mask) {
    if (static_cast<int>(opts.output_mask->size()) != N)
      throw std::invalid_argument("group_convolve: bad output mask arity");
    for (int k = 0; k < N; ++k) out_box[k] = std::min(out_box[k], (*opts.output_mask)[k]);
  }

  std::vector<KernelPoint> kern = collect_kernel(spec, phi);
  GridFunction out(lat);

  std::vector<std::pair<int, int>> win(N);
  for (int k = 0; k < N; ++k) win[k] = axis_window(lat, k, out_box[k]);

  // Fast path: every axis but the last is a pure lattice shift and the last
  // axis offset does not depend on the last coordinate.
  bool shift_law = spec.layered_law() && !opts.force_generic;
  if (shift_law)
    for (int k = 0; k + 1 < N; ++k) {
      Polynomial rest = spec.law[k];
      rest -= Polynomial::variable(2 * N, k);
      rest -= Polynomial::variable(2 * N, N + k);
      if (!rest.is_zero()) shift_law = false;
    }

  if (shift_law) {
    const int last = N - 1;
    const int nlast = lat.n[last];
    const double hlast = lat.h[last];
    std::vector<double> p(N), x(N);
    std::vector<int> oidx(N);
    // iterate over output lines along the last axis
    std::vector<int> line(N - 1);
    for (int k = 0; k < N - 1; ++k) line[k] = win[k].first;
    bool done = (N > 1) ? false : true;
    auto advance = [&]() {
      for (int k = N - 2; k >= 0; --k) {
        if (++line[k] <= win[k].second) return true;
        line[k] = win[k].first;
      }
      return false;
    };
    if (N == 1) {
      // 1-D: the "line" is the whole axis
    }
    do {
      for (int k = 0; k < N - 1; ++k) {
        oidx[k] = line[k];
        x[k] = lat.coord(k, line[k]);
      }
      std::size_t base = 0;
      for (int k = 0; k < N - 1; ++k) base += lat.stride[k] * oidx[k];
      for (const auto& kp : kern) {
        // read line index on axes < last: shift by kernel index offset
        std::size_t rbase = 0;
        bool in_box = true;
        for (int k = 0; k < N - 1; ++k) {
          int shift = kp.idx[k] - lat.n[k] / 2;  // y_k = coord => index offset from 0
          int ri = oidx[k] - shift;
          if (periodic_data) {
            ri = lat.wrap(k, ri);
          } else if (ri < 0 || ri >= lat.n[k]) {
            in_box = false;
            break;
          }
          rbase += lat.stride[k] * ri;
        }
        if (!in_box) continue;
        // offset on the last axis: (y^-1 o x)_last with x_last = 0
        x[last] = 0.0;
        for (int k = 0; k < N; ++k) p[k] = 0.0;
        {
          std::vector<double> xy(2 * N);
          for (int k = 0; k < N; ++k) xy[k] = kp.y_inv[k];
          for (int k = 0; k < N; ++k) xy[N + k] = x[k];
          p[last] = spec.law[last].eval(xy);
        }
        // read coordinate is delta + coord(i); as an index that is i + delta/h
        double uoff = p[last] / hlast;
        double fl = std::floor(uoff);
        double frac = uoff - fl;
        if (frac < 1e-9) frac = 0.0;
        if (frac > 1.0 - 1e-9) {
          frac = 0.0;
          fl += 1.0;
        }
        int shift0 = static_cast<int>(fl);  // index of p_last relative to index of -L
        const double w0 = kp.weight * (1.0 - frac);
        const double w1 = kp.weight * frac;
        for (int i = win[last].first; i <= win[last].second; ++i) {
          int r0 = i + shift0;
          int r1 = r0 + 1;
          double acc = 0.0;
          if (periodic_data) {
            acc = w0 * u.v[rbase + lat.stride[last] * lat.wrap(last, r0)];
            if (w1 != 0.0) acc += w1 * u.v[rbase + lat.stride[last] * lat.wrap(last, r1)];
          } else {
            if (r0 >= 0 && r0 < nlast) acc += w0 * u.v[rbase + lat.stride[last] * r0];
            if (w1 != 0.0 && r1 >= 0 && r1 < nlast)
              acc += w1 * u.v[rbase + lat.stride[last] * r1];
          }
          out.v[base + lat.stride[last] * i] += acc;
        }
      }
      done = (N == 1) ? true : !advance();
    } while (!done);
    return out;
  }

  // generic path
  std::vector<double> x(N);
  std::vector<int> oidx(N, 0);
  for (int k = 0; k < N; ++k) oidx[k] = win[k].first;
  std::vector<double> xy(2 * N);
  Coords p(N);
  while (true) {
    for (int k = 0; k < N; ++k) x[k] = lat.coord(k, oidx[k]);
    std::size_t flat = 0;
    for (int k = 0; k < N; ++k) flat += lat.stride[k] * oidx[k];
    double acc = 0.0;
    for (const auto& kp : kern) {
      for (int k = 0; k < N; ++k) xy[k] = kp.y_inv[k];
      for (int k = 0; k < N; ++k) xy[N + k] = x[k];
      for (int k = 0; k < N; ++k) p[k] = spec.law[k].eval(xy);
      acc += kp.weight * (periodic_data ? interpolate(u, p) : interp_zero_ext(u, p));
    }
    out.v[flat] = acc;
    int k = N - 1;
    while (k >= 0) {
      if (++oidx[k] <= win[k].second) break;
      oidx[k] = win[k].first;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

namespace {

/// 1-D bump (1 - t^2)^p on |t| < 1 with exact unit mass.
struct BaseBump {
  static constexpr int p = 6;
  static double mass_inverse() {
    // integral_{-1}^{1} (1 - t^2)^p dt = 2^(2p+1) (p!)^2 / (2p+1)!
    double num = std::pow(2.0, 2 * p + 1);
    for (int i = 1; i <= p; ++i) num *= i;
    for (int i = 1; i <= p; ++i) num *= i;
    double den = 1.0;
    for (int i = 1; i <= 2 * p + 1; ++i) den *= i;
    return den / num;
  }
  static double value(double t) {
    double s = 1.0 - t * t;
    if (s <= 0.0) return 0.0;
    double w = 1.0;
    for (int i = 0; i < p; ++i) w *= s;
    static const double c = mass_inverse();
    return c * w;
  }
};

}  // namespace

double mollifier_value(const GroupSpec& spec, double eps, std::span<const double> x) {
  double v = 1.0;
  for (int k = 0; k < spec.N; ++k) {
    double scale = std::pow(eps, spec.weights[k]);
    v *= BaseBump::value(x[k] / scale) / scale;
  }
  return v;
}

GridFunction mollifier(const GroupSpec& spec, const Lattice& lat, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("mollifier: eps must be positive");
  if (lat.dim() != spec.N) throw std::invalid_argument("mollifier: dimension mismatch");
  for (int k = 0; k < spec.N; ++k) {
    double radius = std::pow(eps, spec.weights[k]);
    if (2.0 * radius / lat.h[k] < 4.0)
      throw ResolutionError("mollifier: kernel under-resolved (< 4 points across)");
    if (radius > lat.half_width[k] - 2.0 * lat.h[k])
      throw SupportError("mollifier: kernel support does not fit the box");
  }
  return GridFunction::sample(
      lat, [&](std::span<const double> x) { return mollifier_value(spec, eps, x); });
}

GridFunction mollify(const GroupSpec& spec, double eps, const GridFunction& u,
                     const ConvolveOptions& opts) {
  GridFunction phi = mollifier(spec, u.lat, eps);
  return group_convolve(spec, phi, u, opts);
}

}  // namespace carnot
