#include "carnot/lattice.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace carnot {

using json = nlohmann::ordered_json;

Lattice::Lattice(std::vector<double> box_half_width, std::vector<int> points)
    : half_width(std::move(box_half_width)), n(std::move(points)) {
  if (half_width.size() != n.size() || half_width.empty())
    throw std::invalid_argument("lattice: box/points arity mismatch");
  h.resize(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] < 8) throw std::invalid_argument("lattice: fewer than 8 points on an axis");
    if (!(half_width[k] > 0.0)) throw std::invalid_argument("lattice: nonpositive box");
    h[k] = 2.0 * half_width[k] / n[k];
  }
  stride.resize(n.size());
  size = 1;
  for (int k = dim() - 1; k >= 0; --k) {
    stride[k] = size;
    size *= static_cast<std::size_t>(n[k]);
  }
}

double Lattice::cell_volume() const {
  double v = 1.0;
  for (double hk : h) v *= hk;
  return v;
}

std::size_t Lattice::index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int k = 0; k < dim(); ++k) flat += stride[k] * static_cast<std::size_t>(idx[k]);
  return flat;
}

void Lattice::unravel(std::size_t flat, std::span<int> idx) const {
  for (int k = 0; k < dim(); ++k) {
    idx[k] = static_cast<int>(flat / stride[k]);
    flat %= stride[k];
  }
}

void Lattice::point(std::size_t flat, std::span<double> x) const {
  for (int k = 0; k < dim(); ++k) {
    int ik = static_cast<int>(flat / stride[k]);
    flat %= stride[k];
    x[k] = coord(k, ik);
  }
}

int Lattice::wrap(int axis, int index) const {
  int m = n[axis];
  int r = index % m;
  return r < 0 ? r + m : r;
}

double Lattice::hom_radius(const GroupSpec& spec) const {
  double r = std::numeric_limits<double>::max();
  for (int k = 0; k < dim(); ++k)
    r = std::min(r, std::pow(half_width[k], 1.0 / spec.weights[k]));
  return r;
}

bool Lattice::operator==(const Lattice& other) const {
  return half_width == other.half_width && n == other.n;
}

GridFunction::GridFunction(Lattice lattice) : lat(std::move(lattice)), v(lat.size, 0.0) {}

GridFunction GridFunction::sample(const Lattice& lattice,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction out(lattice);
  std::vector<double> x(lattice.dim());
  for (std::size_t i = 0; i < lattice.size; ++i) {
    lattice.point(i, x);
    out.v[i] = f(x);
  }
  return out;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  assert(v.size() == other.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.v[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  assert(v.size() == other.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.v[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double c) {
  for (double& x : v) x *= c;
  return *this;
}

GridFunction& GridFunction::axpy(double a, const GridFunction& x) {
  assert(v.size() == x.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * x.v[i];
  return *this;
}

GridFunction& GridFunction::mul(const GridFunction& other) {
  assert(v.size() == other.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= other.v[i];
  return *this;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double interpolate(const GridFunction& f, std::span<const double> x) {
  const Lattice& lat = f.lat;
  const int d = lat.dim();
  assert(static_cast<int>(x.size()) == d);
  int base[8];
  double frac[8];
  assert(d <= 8);
  for (int k = 0; k < d; ++k) {
    double u = (x[k] + lat.half_width[k]) / lat.h[k];
    double fl = std::floor(u);
    double fr = u - fl;
    // snap to the node when rounding noise leaves us epsilon off-lattice
    if (fr < 1e-9) fr = 0.0;
    if (fr > 1.0 - 1e-9) {
      fr = 0.0;
      fl += 1.0;
    }
    base[k] = lat.wrap(k, static_cast<int>(fl));
    frac[k] = fr;
  }
  const int corners = 1 << d;
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) {
      int bit = (c >> k) & 1;
      w *= bit ? frac[k] : 1.0 - frac[k];
      int ik = bit ? lat.wrap(k, base[k] + 1) : base[k];
      flat += lat.stride[k] * static_cast<std::size_t>(ik);
    }
    if (w != 0.0) acc += w * f.v[flat];
  }
  return acc;
}

double integrate(const GridFunction& f) {
  double acc = 0.0;
  for (double x : f.v) acc += x;
  return acc * f.lat.cell_volume();
}

double inner(const GridFunction& f, const GridFunction& g) {
  assert(f.v.size() == g.v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) acc += f.v[i] * g.v[i];
  return acc * f.lat.cell_volume();
}

double l2_norm(const GridFunction& f) {
  double acc = 0.0;
  for (double x : f.v) acc += x * x;
  return std::sqrt(acc * f.lat.cell_volume());
}

double lp_norm(const GridFunction& f, double p) {
  if (p < 1.0) throw std::domain_error("lp_norm: p must be >= 1");
  double acc = 0.0;
  for (double x : f.v) acc += std::pow(std::abs(x), p);
  return std::pow(acc * f.lat.cell_volume(), 1.0 / p);
}

SupportInfo support_info(const GroupSpec& spec, const GridFunction& f, double threshold) {
  const Lattice& lat = f.lat;
  const int d = lat.dim();
  SupportInfo info;
  std::vector<int> lo(d, std::numeric_limits<int>::max()), hi(d, -1);
  std::vector<int> idx(d);
  std::vector<double> x(d);
  double r = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < lat.size; ++i) {
    if (std::abs(f.v[i]) <= threshold) continue;
    any = true;
    lat.unravel(i, idx);
    lat.point(i, x);
    r = std::max(r, hom_norm(spec, x));
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], idx[k]);
      hi[k] = std::max(hi[k], idx[k]);
    }
  }
  if (!any) {
    info.empty = true;
    info.box_half_width.assign(d, 0.0);
    return info;
  }
  info.hom_radius = r;
  info.box_half_width.resize(d);
  for (int k = 0; k < d; ++k) {
    double a = std::abs(lat.coord(k, lo[k]));
    double b = std::abs(lat.coord(k, hi[k]));
    info.box_half_width[k] = std::max(a, b);
    // margin of untouched cells between support and the periodic seam
    int margin = std::min(lo[k], lat.n[k] - 1 - hi[k]);
    if (margin < 1) info.full_box = true;
  }
  return info;
}

double smoothstep(int order, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  switch (order) {
    case 1:
      return t * t * (3 - 2 * t);
    case 2:
      return t * t * t * (10 + t * (-15 + 6 * t));
    case 3:
      return t * t * t * t * (35 + t * (-84 + t * (70 - 20 * t)));
    case 4:
      return t * t * t * t * t * (126 + t * (-420 + t * (540 + t * (-315 + 70 * t))));
    default:
      throw std::invalid_argument("smoothstep: order must be 1..4");
  }
}

double CutoffFunction::operator()(const GroupSpec& spec, std::span<const double> x) const {
  assert(static_cast<int>(center.size()) == spec.N || center.empty());
  double r;
  if (center.empty()) {
    r = hom_norm(spec, Coords(x.begin(), x.end()));
  } else {
    Coords rel = multiply(spec, inverse(spec, center), Coords(x.begin(), x.end()));
    r = hom_norm(spec, rel);
  }
  if (r <= r0) return 1.0;
  if (r >= r1) return 0.0;
  return smoothstep(order, (r1 - r) / (r1 - r0));
}

GridFunction CutoffFunction::sample(const GroupSpec& spec, const Lattice& lat) const {
  return GridFunction::sample(lat, [&](std::span<const double> x) { return (*this)(spec, x); });
}

double cutoff_nesting_defect(const GridFunction& zeta0, const GridFunction& zeta) {
  assert(zeta0.v.size() == zeta.v.size());
  double m = 0.0;
  for (std::size_t i = 0; i < zeta0.v.size(); ++i)
    m = std::max(m, zeta0.v[i] * (1.0 - zeta.v[i]));
  return m;
}

void save_grid(const GridFunction& f, const std::string& path_prefix) {
  json header;
  header["box"] = f.lat.half_width;
  header["n"] = f.lat.n;
  header["dtype"] = "float64";
  header["order"] = "row-major";
  std::ofstream hj(path_prefix + ".json");
  if (!hj) throw std::runtime_error("save_grid: cannot open " + path_prefix + ".json");
  hj << header.dump(2) << "\n";
  std::ofstream hb(path_prefix + ".bin", std::ios::binary);
  if (!hb) throw std::runtime_error("save_grid: cannot open " + path_prefix + ".bin");
  hb.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

GridFunction load_grid(const std::string& path_prefix) {
  std::ifstream hj(path_prefix + ".json");
  if (!hj) throw std::runtime_error("load_grid: cannot open " + path_prefix + ".json");
  json header = json::parse(hj);
  if (header.at("dtype").get<std::string>() != "float64" ||
      header.at("order").get<std::string>() != "row-major")
    throw std::runtime_error("load_grid: unsupported layout");
  Lattice lat(header.at("box").get<std::vector<double>>(),
              header.at("n").get<std::vector<int>>());
  GridFunction f(lat);
  std::ifstream hb(path_prefix + ".bin", std::ios::binary);
  if (!hb) throw std::runtime_error("load_grid: cannot open " + path_prefix + ".bin");
  hb.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (static_cast<std::size_t>(hb.gcount()) != f.v.size() * sizeof(double))
    throw std::runtime_error("load_grid: truncated binary payload");
  return f;
}

}  // namespace carnot
