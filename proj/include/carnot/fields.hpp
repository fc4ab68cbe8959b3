#pragma once

#include <Eigen/Dense>

#include "carnot/group.hpp"
#include "carnot/lattice.hpp"

namespace carnot {

/// First-order operator sum_k c_k(x) d_k with polynomial coefficients;
/// the result type of brackets.
struct FirstOrderOperator {
  std::vector<Polynomial> coeffs;  // N polynomials in N vars
};

/// A left or right invariant generator applied through centered finite
/// differences of the given order (2 or 4).
struct FieldOperator {
  GroupSpec spec;
  FieldKind kind = FieldKind::Left;
  int index = 1;  // 1-based generator index
  int order = 2;
};

FieldOperator make_field(const GroupSpec& spec, FieldKind kind, int index, int order = 2);

/// d/dx_k with periodic wraparound, centered stencil of order 2 or 4.
GridFunction axis_diff(const GridFunction& f, int axis, int order = 2);

GridFunction apply_field(const FieldOperator& op, const GridFunction& f);
GridFunction apply_field(const GroupSpec& spec, FieldKind kind, int index,
                         const GridFunction& f, int order = 2);
GridFunction apply_operator(const FirstOrderOperator& op, const GridFunction& f,
                            int order = 2);

/// X_i X_j f as composition of two first-order applications (j first).
GridFunction apply_second_order(const GroupSpec& spec, int i, int j,
                                const GridFunction& f, int order = 2);

/// Commutator [A, B] = AB - BA via polynomial arithmetic on the
/// coefficients. Both fields must be of the same kind.
FirstOrderOperator bracket(const GroupSpec& spec, FieldKind kindA, int iA,
                           FieldKind kindB, int iB);

/// Dimension of the span at `point` of the generators and iterated
/// brackets up to the given depth; rank decided by singular values with a
/// scale-invariant threshold.
int hormander_rank(const GroupSpec& spec, int depth, const Coords& point);

/// L2 norm of X_iL (X_iR^R f) - X_iR^R (X_iL f) on the lattice.
double commutation_check(const GroupSpec& spec, const GridFunction& f, int iL, int iR,
                         int order = 2);

/// | integral f X_i g + integral (X_i f) g |.
double integration_by_parts_residual(const GroupSpec& spec, const GridFunction& f,
                                     const GridFunction& g, int i, int order = 2);

/// Translation operators evaluated by interpolation (periodic reads):
/// (L_y f)(x) = f(y o x), (R_y f)(x) = f(x o y).
GridFunction left_translate(const GroupSpec& spec, const Coords& y, const GridFunction& f);
GridFunction right_translate(const GroupSpec& spec, const Coords& y, const GridFunction& f);

/// Precomputed coefficient tables for fast repeated field application on a
/// fixed lattice (the solver's hot path).
class FieldTable {
public:
  FieldTable(const GroupSpec& spec, const Lattice& lat, int order = 2);

  const Lattice& lattice() const { return lat_; }
  int order() const { return order_; }
  int generators() const { return q_; }

  void apply(FieldKind kind, int index, const GridFunction& in, GridFunction& out) const;

  /// out = sum_ij a(i,j) X_i X_j in, computed as sum_i X_i (sum_j a(i,j) X_j in).
  /// Requires a workspace of q + 2 grids (resized on demand).
  void a_form(const Eigen::MatrixXd& a, const GridFunction& in, GridFunction& out,
              std::vector<GridFunction>& scratch) const;

  /// Diagonal of the a-form stencil at every lattice point (for Jacobi
  /// preconditioning and explicit amplification bounds).
  GridFunction a_form_diagonal(const Eigen::MatrixXd& a) const;

private:
  struct TermTable {
    int axis;
    bool constant;
    double c;
    std::vector<double> grid;  // sampled coefficient when not constant
  };

  void apply_terms(const std::vector<TermTable>& terms, const GridFunction& in,
                   GridFunction& out) const;

  Lattice lat_;
  int order_;
  int q_;
  int dim_;
  std::vector<std::vector<TermTable>> left_, right_;  // per generator
};

}  // namespace carnot
