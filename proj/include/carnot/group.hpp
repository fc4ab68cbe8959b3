#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "carnot/polynomial.hpp"

namespace carnot {

/// Point of the group in its global (exponential) coordinates.
using Coords = std::vector<double>;

enum class FieldKind { Left, Right };

enum class NormKind { Max, QPower };

/// Full description of a homogeneous (Carnot) group on R^N: dilation
/// weights, polynomial group law and inverse, and the coefficient
/// polynomials of the left and right invariant generator fields.
///
/// Coordinates are graded: weights are nondecreasing and start at 1, the
/// first q coordinates correspond to the generators, and Exp(t X_i) = t e_i.
struct GroupSpec {
  std::string name;
  int N = 0;  // topological dimension
  int q = 0;  // number of generators
  int s = 0;  // step of the stratification
  std::vector<int> weights;                        // N entries, alpha_1..alpha_N
  std::vector<Polynomial> law;                     // N polynomials in 2N vars (x,y)
  std::vector<Polynomial> inverse_law;             // N polynomials in N vars
  std::vector<std::vector<Polynomial>> left_fields;   // q lists of N polynomials
  std::vector<std::vector<Polynomial>> right_fields;  // q lists of N polynomials

  /// Structural sanity: arities, weight monotonicity, generator count.
  void validate() const;

  int homogeneous_dimension() const;

  /// True when the law has the layered form (x o y)_k = x_k + y_k + Q_k
  /// with Q_k free of x_j, y_j for j >= k. Holds for canonical graded
  /// coordinates; enables a fast convolution path.
  bool layered_law() const;
};

// ---- group arithmetic -----------------------------------------------------

Coords multiply(const GroupSpec& spec, const Coords& x, const Coords& y);
Coords inverse(const GroupSpec& spec, const Coords& x);
Coords dilate(const GroupSpec& spec, double lambda, const Coords& x);
double hom_norm(const GroupSpec& spec, const Coords& x, NormKind kind = NormKind::Max);
Coords exp_generator(const GroupSpec& spec, int i, double t);  // i is 1-based
int homogeneous_dimension(const GroupSpec& spec);

/// Scale a point to prescribed homogeneous norm (no-op for the origin).
Coords with_hom_norm(const GroupSpec& spec, const Coords& x, double r);

// ---- serialization and registry -------------------------------------------

std::string group_to_json(const GroupSpec& spec);
GroupSpec group_from_json(const std::string& text);

GroupSpec make_abelian_r1();
GroupSpec make_abelian_r2();
GroupSpec make_heisenberg();

/// Built-in groups by CLI name ("r1", "r2", "heis"); unknown names raise
/// an error that lists the available ones. register_group adds a custom spec.
const std::vector<std::string>& builtin_group_names();
GroupSpec group_by_name(const std::string& name);
void register_group(const GroupSpec& spec);

// ---- deterministic RNG helpers --------------------------------------------

/// splitmix64; used to derive independent stream seeds from a base seed.
uint64_t mix_seed(uint64_t seed, uint64_t salt);
uint64_t fnv1a64(std::string_view text);

/// Minimal deterministic generator with portable uniform/normal output
/// (standard-library distributions are implementation-defined).
class Rng {
public:
  explicit Rng(uint64_t seed);
  uint64_t next_u64();
  double uniform();                         // [0,1)
  double uniform(double lo, double hi);     // [lo,hi)
  double normal();                          // standard normal, Box-Muller
  int uniform_int(int lo, int hi);          // inclusive bounds

private:
  uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace carnot
