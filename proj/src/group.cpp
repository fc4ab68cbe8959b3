#include "carnot/group.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace carnot {

using json = nlohmann::ordered_json;

void GroupSpec::validate() const {
  if (N <= 0 || q <= 0 || q > N || s <= 0)
    throw std::invalid_argument("group spec: bad dimensions");
  if (static_cast<int>(weights.size()) != N)
    throw std::invalid_argument("group spec: weights size != N");
  if (weights[0] != 1)
    throw std::invalid_argument("group spec: alpha_1 must be 1");
  for (int k = 1; k < N; ++k)
    if (weights[k] < weights[k - 1])
      throw std::invalid_argument("group spec: weights must be nondecreasing");
  for (int k = 0; k < q; ++k)
    if (weights[k] != 1)
      throw std::invalid_argument("group spec: generator weights must be 1");
  if (static_cast<int>(law.size()) != N || static_cast<int>(inverse_law.size()) != N)
    throw std::invalid_argument("group spec: law arity");
  if (static_cast<int>(left_fields.size()) != q || static_cast<int>(right_fields.size()) != q)
    throw std::invalid_argument("group spec: field count != q");
  for (const auto& f : left_fields)
    if (static_cast<int>(f.size()) != N)
      throw std::invalid_argument("group spec: field coefficient count != N");
  for (const auto& f : right_fields)
    if (static_cast<int>(f.size()) != N)
      throw std::invalid_argument("group spec: field coefficient count != N");
}

int GroupSpec::homogeneous_dimension() const {
  int acc = 0;
  for (int w : weights) acc += w;
  return acc;
}

bool GroupSpec::layered_law() const {
  for (int k = 0; k < N; ++k) {
    Polynomial rest = law[k];
    rest -= Polynomial::variable(2 * N, k);      // x_k
    rest -= Polynomial::variable(2 * N, N + k);  // y_k
    for (const auto& t : rest.terms())
      for (int j = k; j < N; ++j)
        if (t.exp[j] != 0 || t.exp[N + j] != 0) return false;
  }
  return true;
}

namespace {
void check_dim(const GroupSpec& spec, const Coords& x, const char* what) {
  if (static_cast<int>(x.size()) != spec.N) {
    std::ostringstream os;
    os << what << ": expected dimension " << spec.N << ", got " << x.size();
    throw std::invalid_argument(os.str());
  }
}
}  // namespace

Coords multiply(const GroupSpec& spec, const Coords& x, const Coords& y) {
  check_dim(spec, x, "multiply");
  check_dim(spec, y, "multiply");
  std::vector<double> xy(2 * spec.N);
  std::copy(x.begin(), x.end(), xy.begin());
  std::copy(y.begin(), y.end(), xy.begin() + spec.N);
  Coords out(spec.N);
  for (int k = 0; k < spec.N; ++k) out[k] = spec.law[k].eval(xy);
  return out;
}

Coords inverse(const GroupSpec& spec, const Coords& x) {
  check_dim(spec, x, "inverse");
  Coords out(spec.N);
  for (int k = 0; k < spec.N; ++k) out[k] = spec.inverse_law[k].eval(x);
  return out;
}

Coords dilate(const GroupSpec& spec, double lambda, const Coords& x) {
  if (!(lambda > 0.0)) throw std::domain_error("dilate: lambda must be positive");
  check_dim(spec, x, "dilate");
  Coords out(spec.N);
  for (int k = 0; k < spec.N; ++k) out[k] = std::pow(lambda, spec.weights[k]) * x[k];
  return out;
}

double hom_norm(const GroupSpec& spec, const Coords& x, NormKind kind) {
  check_dim(spec, x, "hom_norm");
  if (kind == NormKind::Max) {
    double m = 0.0;
    for (int k = 0; k < spec.N; ++k)
      m = std::max(m, std::pow(std::abs(x[k]), 1.0 / spec.weights[k]));
    return m;
  }
  const double Q = spec.homogeneous_dimension();
  double acc = 0.0;
  for (int k = 0; k < spec.N; ++k)
    acc += std::pow(std::abs(x[k]), Q / spec.weights[k]);
  return std::pow(acc, 1.0 / Q);
}

Coords exp_generator(const GroupSpec& spec, int i, double t) {
  if (i < 1 || i > spec.q) throw std::out_of_range("exp_generator: index out of range");
  Coords out(spec.N, 0.0);
  out[i - 1] = t;
  return out;
}

int homogeneous_dimension(const GroupSpec& spec) { return spec.homogeneous_dimension(); }

Coords with_hom_norm(const GroupSpec& spec, const Coords& x, double r) {
  double n = hom_norm(spec, x);
  if (n == 0.0) return x;
  return dilate(spec, r / n, x);
}

// ---- serialization ---------------------------------------------------------

namespace {

json poly_to_json(const Polynomial& p) {
  json arr = json::array();
  for (const auto& t : p.terms()) arr.push_back(json::array({t.exp, t.coeff}));
  return arr;
}

Polynomial poly_from_json(const json& arr, int nvars) {
  std::vector<Polynomial::Term> terms;
  for (const auto& item : arr) {
    Polynomial::Term t;
    t.exp = item.at(0).get<std::vector<int>>();
    t.coeff = item.at(1).get<double>();
    terms.push_back(std::move(t));
  }
  return Polynomial(nvars, std::move(terms));
}

json poly_list_to_json(const std::vector<Polynomial>& ps) {
  json arr = json::array();
  for (const auto& p : ps) arr.push_back(poly_to_json(p));
  return arr;
}

std::vector<Polynomial> poly_list_from_json(const json& arr, int nvars) {
  std::vector<Polynomial> out;
  for (const auto& item : arr) out.push_back(poly_from_json(item, nvars));
  return out;
}

}  // namespace

std::string group_to_json(const GroupSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["N"] = spec.N;
  j["q"] = spec.q;
  j["s"] = spec.s;
  j["weights"] = spec.weights;
  j["law"] = poly_list_to_json(spec.law);
  j["inverse_law"] = poly_list_to_json(spec.inverse_law);
  json lf = json::array(), rf = json::array();
  for (const auto& f : spec.left_fields) lf.push_back(poly_list_to_json(f));
  for (const auto& f : spec.right_fields) rf.push_back(poly_list_to_json(f));
  j["left_fields"] = lf;
  j["right_fields"] = rf;
  return j.dump(2);
}

GroupSpec group_from_json(const std::string& text) {
  json j = json::parse(text);
  GroupSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.N = j.at("N").get<int>();
  spec.q = j.at("q").get<int>();
  spec.s = j.at("s").get<int>();
  spec.weights = j.at("weights").get<std::vector<int>>();
  spec.law = poly_list_from_json(j.at("law"), 2 * spec.N);
  spec.inverse_law = poly_list_from_json(j.at("inverse_law"), spec.N);
  for (const auto& f : j.at("left_fields"))
    spec.left_fields.push_back(poly_list_from_json(f, spec.N));
  for (const auto& f : j.at("right_fields"))
    spec.right_fields.push_back(poly_list_from_json(f, spec.N));
  spec.validate();
  return spec;
}

// ---- built-in groups -------------------------------------------------------

namespace {

std::vector<Polynomial> abelian_law(int N) {
  std::vector<Polynomial> law;
  for (int k = 0; k < N; ++k) {
    Polynomial p = Polynomial::variable(2 * N, k);
    p += Polynomial::variable(2 * N, N + k);
    law.push_back(p);
  }
  return law;
}

std::vector<Polynomial> negation_law(int N) {
  std::vector<Polynomial> inv;
  for (int k = 0; k < N; ++k) inv.push_back(Polynomial::variable(N, k, -1.0));
  return inv;
}

std::vector<std::vector<Polynomial>> coordinate_fields(int N, int q) {
  std::vector<std::vector<Polynomial>> fields(q);
  for (int i = 0; i < q; ++i) {
    fields[i].assign(N, Polynomial(N));
    fields[i][i] = Polynomial::constant(N, 1.0);
  }
  return fields;
}

}  // namespace

GroupSpec make_abelian_r1() {
  GroupSpec g;
  g.name = "r1";
  g.N = 1;
  g.q = 1;
  g.s = 1;
  g.weights = {1};
  g.law = abelian_law(1);
  g.inverse_law = negation_law(1);
  g.left_fields = coordinate_fields(1, 1);
  g.right_fields = coordinate_fields(1, 1);
  g.validate();
  return g;
}

GroupSpec make_abelian_r2() {
  GroupSpec g;
  g.name = "r2";
  g.N = 2;
  g.q = 2;
  g.s = 1;
  g.weights = {1, 1};
  g.law = abelian_law(2);
  g.inverse_law = negation_law(2);
  g.left_fields = coordinate_fields(2, 2);
  g.right_fields = coordinate_fields(2, 2);
  g.validate();
  return g;
}

GroupSpec make_heisenberg() {
  // Symmetric coordinates: (x o y)_3 = x_3 + y_3 + (x_1 y_2 - x_2 y_1)/2.
  GroupSpec g;
  g.name = "heis";
  g.N = 3;
  g.q = 2;
  g.s = 2;
  g.weights = {1, 1, 2};
  g.law = abelian_law(3);
  g.law[2] += Polynomial::monomial(6, {1, 0, 0, 0, 1, 0}, 0.5);   // x1 y2
  g.law[2] += Polynomial::monomial(6, {0, 1, 0, 1, 0, 0}, -0.5);  // -x2 y1
  g.inverse_law = negation_law(3);

  // X1 = d1 - (x2/2) d3, X2 = d2 + (x1/2) d3
  g.left_fields = coordinate_fields(3, 2);
  g.left_fields[0][2] = Polynomial::variable(3, 1, -0.5);
  g.left_fields[1][2] = Polynomial::variable(3, 0, 0.5);

  // X1^R = d1 + (x2/2) d3, X2^R = d2 - (x1/2) d3
  g.right_fields = coordinate_fields(3, 2);
  g.right_fields[0][2] = Polynomial::variable(3, 1, 0.5);
  g.right_fields[1][2] = Polynomial::variable(3, 0, -0.5);
  g.validate();
  return g;
}

namespace {

std::map<std::string, GroupSpec>& registry() {
  static std::map<std::string, GroupSpec> reg = [] {
    std::map<std::string, GroupSpec> r;
    r["r1"] = make_abelian_r1();
    r["r2"] = make_abelian_r2();
    r["heis"] = make_heisenberg();
    return r;
  }();
  return reg;
}

}  // namespace

const std::vector<std::string>& builtin_group_names() {
  static const std::vector<std::string> names = {"r1", "r2", "heis"};
  return names;
}

GroupSpec group_by_name(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::ostringstream os;
    os << "unknown group '" << name << "'; available:";
    for (const auto& [k, v] : reg) os << " " << k;
    throw std::invalid_argument(os.str());
  }
  return it->second;
}

void register_group(const GroupSpec& spec) {
  spec.validate();
  registry()[spec.name] = spec;
}

// ---- RNG --------------------------------------------------------------------

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(uint64_t seed) {
  // xoshiro256** seeded via splitmix64
  for (int i = 0; i < 4; ++i) {
    seed = mix_seed(seed, i);
    state_[i] = seed;
  }
}

namespace {
inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 1e-300);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

int Rng::uniform_int(int lo, int hi) {
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

}  // namespace carnot
