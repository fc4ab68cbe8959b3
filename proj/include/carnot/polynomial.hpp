#pragma once

#include <span>
#include <string>
#include <vector>

namespace carnot {

/// Sparse multivariate polynomial with real coefficients, stored as a
/// table of (multi-index, coefficient) terms. Supports the arithmetic
/// needed for group laws, invariant vector field coefficients and
/// commutators; no symbolic-algebra dependency.
class Polynomial {
public:
  struct Term {
    std::vector<int> exp;  // one exponent per variable
    double coeff = 0.0;
  };

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}
  Polynomial(int nvars, std::vector<Term> terms);

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int index, double scale = 1.0);
  static Polynomial monomial(int nvars, std::vector<int> exp, double c);

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  double constant_value() const;  // 0 when zero polynomial
  int degree() const;

  double eval(std::span<const double> x) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
  friend Polynomial operator*(double c, Polynomial a) { return a *= c; }
  Polynomial operator*(const Polynomial& other) const;

  /// Partial derivative with respect to variable `index`.
  Polynomial derivative(int index) const;

  /// Maximum of |p| over the box Pi_k [-b_k, b_k], bounded by the sum of
  /// |coeff| * Pi b_k^e_k. Used for stencil amplification estimates.
  double sup_bound(std::span<const double> box_half_width) const;

  bool equals(const Polynomial& other, double tol = 0.0) const;
  std::string to_string() const;

private:
  void normalize();  // merge duplicate exponents, drop near-zero terms

  int nvars_ = 0;
  std::vector<Term> terms_;  // kept sorted lexicographically by exponent
};

}  // namespace carnot
