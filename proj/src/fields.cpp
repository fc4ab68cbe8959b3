#include "carnot/fields.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace carnot {

FieldOperator make_field(const GroupSpec& spec, FieldKind kind, int index, int order) {
  if (index < 1 || index > spec.q) throw std::out_of_range("field index out of range");
  if (order != 2 && order != 4) throw std::invalid_argument("stencil order must be 2 or 4");
  return FieldOperator{spec, kind, index, order};
}

GridFunction axis_diff(const GridFunction& f, int axis, int order) {
  const Lattice& lat = f.lat;
  const int d = lat.dim();
  if (axis < 0 || axis >= d) throw std::out_of_range("axis_diff: bad axis");
  const int n = lat.n[axis];
  const int min_pts = order == 2 ? 3 : 5;
  if (n < min_pts) throw std::invalid_argument("axis_diff: lattice too coarse for stencil");
  const std::size_t st = lat.stride[axis];
  GridFunction out(lat);

  // lines along `axis`: flat = hi * (st * n) + i * st + lo with lo < st
  const std::size_t block = st * static_cast<std::size_t>(n);
  const std::size_t nblocks = lat.size / block;
  if (order == 2) {
    const double c = 1.0 / (2.0 * lat.h[axis]);
    for (std::size_t hi = 0; hi < nblocks; ++hi)
      for (std::size_t lo = 0; lo < st; ++lo) {
        const std::size_t s0 = hi * block + lo;
        for (int i = 0; i < n; ++i) {
          std::size_t here = s0 + st * i;
          std::size_t ip = s0 + st * ((i + 1) % n);
          std::size_t im = s0 + st * ((i - 1 + n) % n);
          out.v[here] = c * (f.v[ip] - f.v[im]);
        }
      }
  } else {
    const double c = 1.0 / (12.0 * lat.h[axis]);
    for (std::size_t hi = 0; hi < nblocks; ++hi)
      for (std::size_t lo = 0; lo < st; ++lo) {
        const std::size_t s0 = hi * block + lo;
        for (int i = 0; i < n; ++i) {
          std::size_t here = s0 + st * i;
          std::size_t ip1 = s0 + st * ((i + 1) % n);
          std::size_t ip2 = s0 + st * ((i + 2) % n);
          std::size_t im1 = s0 + st * ((i - 1 + n) % n);
          std::size_t im2 = s0 + st * ((i - 2 + 2 * n) % n);
          out.v[here] = c * (-f.v[ip2] + 8.0 * f.v[ip1] - 8.0 * f.v[im1] + f.v[im2]);
        }
      }
  }
  return out;
}

namespace {

GridFunction apply_coeff_list(const std::vector<Polynomial>& coeffs, const GridFunction& f,
                              int order) {
  const Lattice& lat = f.lat;
  const int d = lat.dim();
  GridFunction out(lat);
  std::vector<double> x(d);
  for (int k = 0; k < d; ++k) {
    const Polynomial& c = coeffs[k];
    if (c.is_zero()) continue;
    GridFunction dk = axis_diff(f, k, order);
    if (c.is_constant()) {
      out.axpy(c.constant_value(), dk);
    } else {
      for (std::size_t i = 0; i < lat.size; ++i) {
        lat.point(i, x);
        out.v[i] += c.eval(x) * dk.v[i];
      }
    }
  }
  return out;
}

}  // namespace

GridFunction apply_field(const FieldOperator& op, const GridFunction& f) {
  const auto& coeffs = op.kind == FieldKind::Left ? op.spec.left_fields[op.index - 1]
                                                  : op.spec.right_fields[op.index - 1];
  return apply_coeff_list(coeffs, f, op.order);
}

GridFunction apply_field(const GroupSpec& spec, FieldKind kind, int index,
                         const GridFunction& f, int order) {
  return apply_field(make_field(spec, kind, index, order), f);
}

GridFunction apply_operator(const FirstOrderOperator& op, const GridFunction& f, int order) {
  return apply_coeff_list(op.coeffs, f, order);
}

GridFunction apply_second_order(const GroupSpec& spec, int i, int j, const GridFunction& f,
                                int order) {
  GridFunction inner = apply_field(spec, FieldKind::Left, j, f, order);
  return apply_field(spec, FieldKind::Left, i, inner, order);
}

namespace {

FirstOrderOperator bracket_raw(const std::vector<Polynomial>& a,
                               const std::vector<Polynomial>& b, int N) {
  FirstOrderOperator out;
  out.coeffs.assign(N, Polynomial(N));
  for (int k = 0; k < N; ++k) {
    Polynomial acc(N);
    for (int l = 0; l < N; ++l) {
      if (!a[l].is_zero()) acc += a[l] * b[k].derivative(l);
      if (!b[l].is_zero()) acc -= b[l] * a[k].derivative(l);
    }
    out.coeffs[k] = acc;
  }
  return out;
}

}  // namespace

FirstOrderOperator bracket(const GroupSpec& spec, FieldKind kindA, int iA, FieldKind kindB,
                           int iB) {
  if (kindA != kindB)
    throw std::invalid_argument("bracket: mixed left/right kinds unsupported");
  const auto& fields = kindA == FieldKind::Left ? spec.left_fields : spec.right_fields;
  if (iA < 1 || iA > spec.q || iB < 1 || iB > spec.q)
    throw std::out_of_range("bracket: generator index out of range");
  return bracket_raw(fields[iA - 1], fields[iB - 1], spec.N);
}

int hormander_rank(const GroupSpec& spec, int depth, const Coords& point) {
  if (depth < 1) throw std::invalid_argument("hormander_rank: depth must be >= 1");
  std::vector<std::vector<Polynomial>> ops;
  for (int i = 0; i < spec.q; ++i) ops.push_back(spec.left_fields[i]);
  std::size_t level_begin = 0;
  for (int d = 2; d <= depth; ++d) {
    std::size_t level_end = ops.size();
    for (int g = 0; g < spec.q; ++g)
      for (std::size_t o = level_begin; o < level_end; ++o)
        ops.push_back(bracket_raw(spec.left_fields[g], ops[o], spec.N).coeffs);
    level_begin = level_end;
  }
  Eigen::MatrixXd m(static_cast<int>(ops.size()), spec.N);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < spec.N; ++c) m(r, c) = ops[r][c].eval(point);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  return rank;
}

double commutation_check(const GroupSpec& spec, const GridFunction& f, int iL, int iR,
                         int order) {
  GridFunction a = apply_field(spec, FieldKind::Right, iR, f, order);
  a = apply_field(spec, FieldKind::Left, iL, a, order);
  GridFunction b = apply_field(spec, FieldKind::Left, iL, f, order);
  b = apply_field(spec, FieldKind::Right, iR, b, order);
  a -= b;
  return l2_norm(a);
}

double integration_by_parts_residual(const GroupSpec& spec, const GridFunction& f,
                                     const GridFunction& g, int i, int order) {
  GridFunction xg = apply_field(spec, FieldKind::Left, i, g, order);
  GridFunction xf = apply_field(spec, FieldKind::Left, i, f, order);
  return std::abs(inner(f, xg) + inner(xf, g));
}

GridFunction left_translate(const GroupSpec& spec, const Coords& y, const GridFunction& f) {
  return GridFunction::sample(f.lat, [&](std::span<const double> x) {
    Coords p = multiply(spec, y, Coords(x.begin(), x.end()));
    return interpolate(f, p);
  });
}

GridFunction right_translate(const GroupSpec& spec, const Coords& y, const GridFunction& f) {
  return GridFunction::sample(f.lat, [&](std::span<const double> x) {
    Coords p = multiply(spec, Coords(x.begin(), x.end()), y);
    return interpolate(f, p);
  });
}

// ---- FieldTable --------------------------------------------------------------

FieldTable::FieldTable(const GroupSpec& spec, const Lattice& lat, int order)
    : lat_(lat), order_(order), q_(spec.q), dim_(lat.dim()) {
  if (order != 2 && order != 4) throw std::invalid_argument("stencil order must be 2 or 4");
  if (dim_ != spec.N) throw std::invalid_argument("FieldTable: lattice/group dimension");
  auto build = [&](const std::vector<std::vector<Polynomial>>& fields) {
    std::vector<std::vector<TermTable>> tables(q_);
    std::vector<double> x(dim_);
    for (int i = 0; i < q_; ++i)
      for (int k = 0; k < dim_; ++k) {
        const Polynomial& c = fields[i][k];
        if (c.is_zero()) continue;
        TermTable t;
        t.axis = k;
        t.constant = c.is_constant();
        t.c = t.constant ? c.constant_value() : 0.0;
        if (!t.constant) {
          t.grid.resize(lat_.size);
          for (std::size_t p = 0; p < lat_.size; ++p) {
            lat_.point(p, x);
            t.grid[p] = c.eval(x);
          }
        }
        tables[i].push_back(std::move(t));
      }
    return tables;
  };
  left_ = build(spec.left_fields);
  right_ = build(spec.right_fields);
}

void FieldTable::apply_terms(const std::vector<TermTable>& terms, const GridFunction& in,
                             GridFunction& out) const {
  assert(in.lat == lat_);
  if (out.v.size() != in.v.size()) out = GridFunction(lat_);
  std::fill(out.v.begin(), out.v.end(), 0.0);
  for (const auto& t : terms) {
    GridFunction dk = axis_diff(in, t.axis, order_);
    if (t.constant) {
      out.axpy(t.c, dk);
    } else {
      for (std::size_t p = 0; p < out.v.size(); ++p) out.v[p] += t.grid[p] * dk.v[p];
    }
  }
}

void FieldTable::apply(FieldKind kind, int index, const GridFunction& in,
                       GridFunction& out) const {
  if (index < 1 || index > q_) throw std::out_of_range("FieldTable: index");
  apply_terms((kind == FieldKind::Left ? left_ : right_)[index - 1], in, out);
}

void FieldTable::a_form(const Eigen::MatrixXd& a, const GridFunction& in, GridFunction& out,
                        std::vector<GridFunction>& scratch) const {
  assert(a.rows() == q_ && a.cols() == q_);
  if (static_cast<int>(scratch.size()) < q_ + 2) scratch.resize(q_ + 2, GridFunction(lat_));
  // v_j = X_j in
  for (int j = 0; j < q_; ++j) apply_terms(left_[j], in, scratch[j]);
  if (out.v.size() != in.v.size()) out = GridFunction(lat_);
  std::fill(out.v.begin(), out.v.end(), 0.0);
  GridFunction& z = scratch[q_];
  GridFunction& xi = scratch[q_ + 1];
  for (int i = 0; i < q_; ++i) {
    if (z.v.size() != in.v.size()) z = GridFunction(lat_);
    std::fill(z.v.begin(), z.v.end(), 0.0);
    for (int j = 0; j < q_; ++j)
      if (a(i, j) != 0.0) z.axpy(a(i, j), scratch[j]);
    apply_terms(left_[i], z, xi);
    out += xi;
  }
}

GridFunction FieldTable::a_form_diagonal(const Eigen::MatrixXd& a) const {
  // f(x) coefficient of sum_ij a_ij X_i X_j with composed centered stencils:
  // -sum_k b_ik(x) (b_jk(x+h e_k) + b_jk(x-h e_k)) / (4 h_k^2) for order 2.
  if (order_ != 2)
    throw std::invalid_argument("a_form_diagonal implemented for order-2 stencils");
  GridFunction diag(lat_);
  std::vector<int> idx(dim_);
  auto coeff_at = [&](const TermTable& t, std::size_t p) {
    return t.constant ? t.c : t.grid[p];
  };
  for (int i = 0; i < q_; ++i)
    for (int j = 0; j < q_; ++j) {
      if (a(i, j) == 0.0) continue;
      for (const auto& ti : left_[i])
        for (const auto& tj : left_[j]) {
          if (ti.axis != tj.axis) continue;
          const int k = ti.axis;
          const double w = -a(i, j) / (4.0 * lat_.h[k] * lat_.h[k]);
          for (std::size_t p = 0; p < lat_.size; ++p) {
            lat_.unravel(p, idx);
            std::ptrdiff_t dp = static_cast<std::ptrdiff_t>(lat_.wrap(k, idx[k] + 1)) - idx[k];
            std::ptrdiff_t dm = static_cast<std::ptrdiff_t>(lat_.wrap(k, idx[k] - 1)) - idx[k];
            std::size_t pp = p + dp * static_cast<std::ptrdiff_t>(lat_.stride[k]);
            std::size_t pm = p + dm * static_cast<std::ptrdiff_t>(lat_.stride[k]);
            diag.v[p] += w * coeff_at(ti, p) * (coeff_at(tj, pp) + coeff_at(tj, pm));
          }
        }
    }
  return diag;
}

}  // namespace carnot
