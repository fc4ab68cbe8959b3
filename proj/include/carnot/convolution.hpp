#pragma once

#include <optional>
#include <stdexcept>

#include "carnot/group.hpp"
#include "carnot/lattice.hpp"

namespace carnot {

/// Raised when a convolution or translation would push support out of the
/// representable box (periodic wraparound would alias compact data).
struct SupportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a kernel is too small for the lattice to resolve.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvolveOptions {
  /// Restrict output to the sub-box |x_k| <= mask[k] (zero elsewhere).
  std::optional<std::vector<double>> output_mask;
  /// Force the generic per-point path (for cross-checking the fast path).
  bool force_generic = false;
};

/// Group convolution (phi * u)(x) = integral phi(y) u(y^-1 o x) dy by lattice
/// quadrature over the kernel support, with off-lattice reads of u by
/// multilinear interpolation.
///
/// The kernel must be compactly supported strictly inside the box. If u has
/// an all-zero margin on every axis it is treated as compact data: reads use
/// zero extension and the support of the result must fit the box (otherwise
/// SupportError). If u touches the box on some axis it is treated as
/// periodic data and reads wrap.
GridFunction group_convolve(const GroupSpec& spec, const GridFunction& phi,
                            const GridFunction& u, const ConvolveOptions& opts = {});

/// Mass-one C^4 bump supported in the unit homogeneous (max-norm) ball,
/// dilated to support radius eps and scaled by eps^-Q, sampled on `lat`.
/// Rejects kernels whose support covers fewer than 4 points on some axis.
GridFunction mollifier(const GroupSpec& spec, const Lattice& lat, double eps);

/// Pointwise evaluation of the same kernel (for oracles and forcing terms).
double mollifier_value(const GroupSpec& spec, double eps, std::span<const double> x);

/// u_eps = phi_eps * u.
GridFunction mollify(const GroupSpec& spec, double eps, const GridFunction& u,
                     const ConvolveOptions& opts = {});

}  // namespace carnot
