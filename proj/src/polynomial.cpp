#include "carnot/polynomial.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace carnot {

namespace {
bool exp_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}
}  // namespace

Polynomial::Polynomial(int nvars, std::vector<Term> terms)
    : nvars_(nvars), terms_(std::move(terms)) {
  for (auto& t : terms_) {
    if (static_cast<int>(t.exp.size()) != nvars_)
      throw std::invalid_argument("polynomial term arity mismatch");
    for (int e : t.exp)
      if (e < 0) throw std::invalid_argument("negative exponent");
  }
  normalize();
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  if (c != 0.0) p.terms_.push_back({std::vector<int>(nvars, 0), c});
  return p;
}

Polynomial Polynomial::variable(int nvars, int index, double scale) {
  std::vector<int> e(nvars, 0);
  e.at(index) = 1;
  return monomial(nvars, std::move(e), scale);
}

Polynomial Polynomial::monomial(int nvars, std::vector<int> exp, double c) {
  Polynomial p(nvars);
  p.terms_.push_back({std::move(exp), c});
  p.normalize();
  return p;
}

bool Polynomial::is_constant() const {
  if (terms_.empty()) return true;
  if (terms_.size() != 1) return false;
  for (int e : terms_[0].exp)
    if (e != 0) return false;
  return true;
}

double Polynomial::constant_value() const {
  if (terms_.empty()) return 0.0;
  assert(is_constant());
  return terms_[0].coeff;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int e : t.exp) s += e;
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::eval(std::span<const double> x) const {
  assert(static_cast<int>(x.size()) == nvars_);
  double acc = 0.0;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (int k = 0; k < nvars_; ++k) {
      int e = t.exp[k];
      double xv = x[k];
      while (e >= 2) {  // small exponents in practice
        m *= xv;
        e -= 1;
      }
      if (e == 1) m *= xv;
    }
    acc += m;
  }
  return acc;
}

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return exp_less(a.exp, b.exp); });
  std::vector<Term> merged;
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().exp == t.exp)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
  terms_ = std::move(merged);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.terms_.empty()) return *this;
  if (terms_.empty() && nvars_ == 0) nvars_ = other.nvars_;
  if (nvars_ != other.nvars_) throw std::invalid_argument("polynomial arity mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  Polynomial neg = other;
  neg *= -1.0;
  return *this += neg;
}

Polynomial& Polynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coeff *= c;
  return *this;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (nvars_ != other.nvars_ && !terms_.empty() && !other.terms_.empty())
    throw std::invalid_argument("polynomial arity mismatch");
  Polynomial out(std::max(nvars_, other.nvars_));
  for (const auto& a : terms_)
    for (const auto& b : other.terms_) {
      Term t;
      t.exp.resize(out.nvars_);
      for (int k = 0; k < out.nvars_; ++k) t.exp[k] = a.exp[k] + b.exp[k];
      t.coeff = a.coeff * b.coeff;
      out.terms_.push_back(std::move(t));
    }
  out.normalize();
  return out;
}

Polynomial Polynomial::derivative(int index) const {
  Polynomial out(nvars_);
  for (const auto& t : terms_) {
    if (t.exp[index] == 0) continue;
    Term d = t;
    d.coeff *= d.exp[index];
    d.exp[index] -= 1;
    out.terms_.push_back(std::move(d));
  }
  out.normalize();
  return out;
}

double Polynomial::sup_bound(std::span<const double> box_half_width) const {
  assert(static_cast<int>(box_half_width.size()) == nvars_);
  double acc = 0.0;
  for (const auto& t : terms_) {
    double m = std::abs(t.coeff);
    for (int k = 0; k < nvars_; ++k)
      m *= std::pow(box_half_width[k], t.exp[k]);
    acc += m;
  }
  return acc;
}

bool Polynomial::equals(const Polynomial& other, double tol) const {
  Polynomial diff = *this;
  diff -= other;
  for (const auto& t : diff.terms_)
    if (std::abs(t.coeff) > tol) return false;
  return true;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << t.coeff;
    for (int k = 0; k < nvars_; ++k)
      if (t.exp[k] > 0) {
        os << "*x" << (k + 1);
        if (t.exp[k] > 1) os << "^" << t.exp[k];
      }
  }
  return os.str();
}

}  // namespace carnot
