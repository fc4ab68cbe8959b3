#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "carnot/group.hpp"

namespace carnot {

/// Periodic lattice over the box Pi_k [-L_k, L_k), n_k points per axis.
struct Lattice {
  std::vector<double> half_width;  // L_k
  std::vector<int> n;              // points per axis, each >= 8
  std::vector<double> h;           // spacings 2 L_k / n_k
  std::vector<std::size_t> stride; // row-major strides
  std::size_t size = 0;

  Lattice() = default;
  Lattice(std::vector<double> box_half_width, std::vector<int> points);

  int dim() const { return static_cast<int>(n.size()); }
  double cell_volume() const;
  double coord(int axis, int index) const { return -half_width[axis] + h[axis] * index; }
  std::size_t index(std::span<const int> idx) const;
  void unravel(std::size_t flat, std::span<int> idx) const;
  void point(std::size_t flat, std::span<double> x) const;
  int wrap(int axis, int index) const;

  /// Radius of the largest homogeneous-norm ball inside the box,
  /// min_k L_k^(1/alpha_k).
  double hom_radius(const GroupSpec& spec) const;

  bool operator==(const Lattice& other) const;
};

/// Scalar field sampled on a periodic lattice. Values are plain data;
/// treat instances as immutable once filled.
struct GridFunction {
  Lattice lat;
  std::vector<double> v;

  GridFunction() = default;
  explicit GridFunction(Lattice lattice);

  static GridFunction sample(const Lattice& lattice,
                             const std::function<double(std::span<const double>)>& f);

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double c);
  GridFunction& axpy(double a, const GridFunction& x);  // this += a*x
  GridFunction& mul(const GridFunction& other);         // pointwise product

  double max_abs() const;
};

/// Periodic multilinear interpolation at an arbitrary point.
double interpolate(const GridFunction& f, std::span<const double> x);

// ---- quadrature -------------------------------------------------------------

double integrate(const GridFunction& f);
double inner(const GridFunction& f, const GridFunction& g);  // integral of f*g
double l2_norm(const GridFunction& f);
double lp_norm(const GridFunction& f, double p);

// ---- support analysis --------------------------------------------------------

struct SupportInfo {
  bool empty = false;
  bool full_box = false;      // no all-zero margin on some axis: treat as periodic data
  double hom_radius = 0.0;    // max homogeneous norm over supporting points
  std::vector<double> box_half_width;  // per-axis support half-width
};

SupportInfo support_info(const GroupSpec& spec, const GridFunction& f,
                         double threshold = 0.0);

// ---- cutoff functions ---------------------------------------------------------

/// Bump that is identically 1 on the hom-norm ball of radius r0 around
/// `center` and 0 outside radius r1, interpolating with a C^k smoothstep.
struct CutoffFunction {
  Coords center;
  double r0 = 0.0;
  double r1 = 0.0;
  int order = 4;  // smoothstep order

  double operator()(const GroupSpec& spec, std::span<const double> x) const;
  GridFunction sample(const GroupSpec& spec, const Lattice& lat) const;
};

/// zeta0 < zeta in the sense that zeta = 1 on supp zeta0; returns the lattice
/// maximum of zeta0 * (1 - zeta), which must be 0 for a valid pair.
double cutoff_nesting_defect(const GridFunction& zeta0, const GridFunction& zeta);

/// Smoothstep of the given order on [0,1] (0 -> 0, 1 -> 1).
double smoothstep(int order, double t);

// ---- binary import/export ------------------------------------------------------

/// Writes <path>.json (header: box, n, dtype, order) and <path>.bin
/// (row-major float64 values).
void save_grid(const GridFunction& f, const std::string& path_prefix);
GridFunction load_grid(const std::string& path_prefix);

}  // namespace carnot
