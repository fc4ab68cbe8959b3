#pragma once

#include "carnot/convolution.hpp"
#include "carnot/group.hpp"
#include "carnot/spacetime.hpp"

namespace carnot {

enum class DeltaSide {
  Right,  // Delta_h f(x) = f(x o h) - f(x)
  Left    // Delta~_h f(x) = f(h o x) - f(x)
};

/// Group increment h = Exp(t X_i) along a generator direction.
struct Increment {
  int direction = 1;  // 1-based generator index
  double t = 0.0;
  DeltaSide side = DeltaSide::Right;
  Coords h;  // exp_generator(direction, t)
};

Increment make_increment(const GroupSpec& spec, DeltaSide side, int direction, double t);

/// Finite difference along h. Compactly supported data uses zero-extension
/// reads and requires the translated support to stay inside the box
/// (SupportError otherwise); data touching the box is treated as periodic.
GridFunction delta(DeltaSide side, const GroupSpec& spec, const Coords& h,
                   const GridFunction& f);

/// m-fold composition of delta.
GridFunction delta_power(DeltaSide side, const GroupSpec& spec, const Coords& h, int m,
                         const GridFunction& f);

SpaceTimeField delta_power(DeltaSide side, const GroupSpec& spec, const Coords& h, int m,
                           const SpaceTimeField& f);

struct SeminormOptions {
  int points_per_direction = 40;  // split evenly between the two signs
  double t_min = 0.0;             // 0: use 2 * coarsest spacing
  double t_max = 1.0;             // homogeneous-norm cap from the definition
};

/// |f|_{m,alpha} (side Right) or |f|^R_{m,alpha} (side Left): supremum of
/// ||Delta_h^m f|| / ||h||^alpha over a log-spaced grid of increments.
struct SeminormReport {
  DeltaSide side = DeltaSide::Right;
  int m = 0;
  double alpha = 0.0;
  double value = 0.0;
  int argmax_direction = 0;
  double argmax_t = 0.0;
  bool tmin_attained = false;   // supremum at the smallest |t|: under-resolved
  bool restricted = false;      // some increments skipped by the safe region
  double t_min = 0.0;
  double t_max_effective = 0.0; // largest |t| actually admissible
  std::string norm = "max";
};

SeminormReport seminorm(DeltaSide side, const GroupSpec& spec, int m, double alpha,
                        const SpaceTimeField& f, const SeminormOptions& opts = {});

/// ||f|| + sum over compositions X_{i1}..X_{ij}, j <= k, of ||...f|| in
/// L2((0,T), box); kind selects the W_X (left) or W_{X^R} (right) scale.
double sobolev_norm(FieldKind kind, const GroupSpec& spec, int k, const SpaceTimeField& u,
                    int order = 2);

/// sqrt(sum_i ||X_i u||^2) over space-time.
double horizontal_gradient_norm(FieldKind kind, const GroupSpec& spec,
                                const SpaceTimeField& u, int order = 2);

/// The Sobolev scale matching a difference side: Delta_h pairs with the left
/// invariant fields, Delta~_h with the right invariant ones.
inline FieldKind sobolev_kind(DeltaSide side) {
  return side == DeltaSide::Right ? FieldKind::Left : FieldKind::Right;
}

struct EquivalenceRatios {
  double seminorm_over_sobolev = 0.0;  // sum_{k<=m} |u|_k / ||u||_{W^{m,2}}
  double gradient_over_first = 0.0;    // ||grad u|| / |u|_1
  bool degenerate = false;             // zero input: ratios defined as 0
};

EquivalenceRatios equivalence_ratio(DeltaSide side, const GroupSpec& spec, int m,
                                    const SpaceTimeField& u,
                                    const SeminormOptions& opts = {});

/// |u|_1^R / (|u|^R_{m,1+eps} + ||u||): bounded for smooth u.
double marchaud_ratio(const GroupSpec& spec, const SpaceTimeField& u, int m, double eps,
                      const SeminormOptions& opts = {});

}  // namespace carnot
