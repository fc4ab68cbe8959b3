#pragma once

#include <functional>

#include "carnot/lattice.hpp"

namespace carnot {

/// Time evaluator for forcing terms and synthetic fields.
using SpaceTimeFn = std::function<double(double t, std::span<const double> x)>;

/// Time-indexed sequence of grid functions u(t_n, .), t_n = n * dt * stride,
/// n = 0..frames-1, covering [0, T]. stride > 1 means only every stride-th
/// solver step was stored.
struct SpaceTimeField {
  Lattice lat;
  double dt = 0.0;  // spacing between stored frames
  double T = 0.0;
  std::vector<GridFunction> frames;

  int steps() const { return static_cast<int>(frames.size()) - 1; }
  double time(int n) const { return dt * n; }

  static SpaceTimeField sample(const Lattice& lat, double T, int steps,
                               const SpaceTimeFn& f);
};

/// L2 over (0,T] x box with right-endpoint time quadrature: frame 0 carries
/// no weight (solutions vanish there by the standing zero initial datum).
double st_l2(const SpaceTimeField& f);
double st_inner(const SpaceTimeField& f, const SpaceTimeField& g);

/// Apply a per-frame transform.
SpaceTimeField st_map(const SpaceTimeField& f,
                      const std::function<GridFunction(const GridFunction&)>& op);

SpaceTimeField st_axpy(double a, const SpaceTimeField& x, const SpaceTimeField& y);

}  // namespace carnot
