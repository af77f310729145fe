#pragma once

// Domain types shared across the library: concepts, relationship kinds,
// per-pair variables and priors, the shared ternary potential, and decoded
// assignments.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace relgraph {

using ConceptId = std::uint32_t;
using VariableId = std::uint32_t;

inline constexpr double kPriorEpsilon = 1e-6;
inline constexpr double kDefaultPrior = 0.01;

// Log-domain stand-in for log(0). Arithmetic on it saturates (see sat_add)
// so that message normalization never produces inf - inf.
inline constexpr double kNegInf = -1e30;

inline double sat_add(double a, double b) noexcept {
  const double r = a + b;
  return r < kNegInf ? kNegInf : r;
}

enum class RelationshipKind { Equivalence, ParentChild };

std::string_view to_string(RelationshipKind kind) noexcept;
RelationshipKind parse_relationship_kind(std::string_view text);

struct Concept {
  ConceptId id = 0;
  std::string name;
  std::vector<std::string> values;
};

// Checks ids are 0..n-1 in order and names are non-empty after trimming.
void validate_vocabulary(std::span<const Concept> concepts);

struct ConceptPair {
  ConceptId left = 0;
  ConceptId right = 0;

  friend bool operator==(const ConceptPair&, const ConceptPair&) = default;
  friend auto operator<=>(const ConceptPair&, const ConceptPair&) = default;
};

// Canonical form of a pair under `kind`: (min, max) for Equivalence,
// unchanged for ParentChild. Throws std::domain_error on left == right.
ConceptPair canonical_pair(ConceptPair pair, RelationshipKind kind);

// Probability that the relationship holds, clamped to [eps, 1 - eps].
class PriorBelief {
 public:
  PriorBelief() = default;
  explicit PriorBelief(double p_one);

  double p_one() const noexcept { return p_one_; }
  double p_zero() const noexcept { return 1.0 - p_one_; }
  // Prior argmax; a tie at 0.5 maps to 0.
  std::uint8_t argmax() const noexcept { return p_one_ > 0.5 ? 1 : 0; }

  friend bool operator==(const PriorBelief&, const PriorBelief&) = default;

 private:
  double p_one_ = 0.5;
};

struct RelationshipVariable {
  ConceptPair pair;
  PriorBelief prior;
};

// Dense index of a pair in the lattice of all pairs over n concepts.
// Equivalence: lexicographic over i < j, bijective onto [0, C(n,2)).
// ParentChild: row-major over ordered pairs, bijective onto [0, n(n-1)).
std::size_t variable_index(ConceptId left, ConceptId right, std::size_t n,
                           RelationshipKind kind);
ConceptPair pair_from_index(std::size_t index, std::size_t n,
                            RelationshipKind kind);
std::size_t dense_variable_count(std::size_t n, RelationshipKind kind);

// Configuration index of (r_ij, r_jk, r_ik): 4*r_ij + 2*r_jk + r_ik.
constexpr std::size_t config_index(int r_ij, int r_jk, int r_ik) noexcept {
  return static_cast<std::size_t>(4 * r_ij + 2 * r_jk + r_ik);
}

// True when the configuration breaks transitivity for `kind`.
bool is_invalid_config(RelationshipKind kind, std::size_t config) noexcept;

// Shared potential over ternary cliques (r_ij, r_jk, r_ik). Invalid
// configurations are exactly zero; the table is normalized so that its
// maximum entry is 1.
class TernaryPotential {
 public:
  // Equivalence takes 5 parameters for configs 000, 001, 010, 100, 111.
  // ParentChild takes 7 for every config except 110.
  static TernaryPotential from_theta(RelationshipKind kind,
                                     std::span<const double> theta);
  static TernaryPotential default_for(RelationshipKind kind);
  static std::size_t parameter_count(RelationshipKind kind) noexcept;

  RelationshipKind kind() const noexcept { return kind_; }
  const std::array<double, 8>& table() const noexcept { return table_; }
  std::array<double, 8> log_table() const noexcept;
  // Free parameters in the order from_theta accepts them.
  std::vector<double> theta() const;

 private:
  TernaryPotential(RelationshipKind kind, std::array<double, 8> table)
      : kind_(kind), table_(table) {}

  RelationshipKind kind_;
  std::array<double, 8> table_;
};

// Configuration indices carrying a free parameter, in theta order.
std::span<const std::size_t> parameter_configs(RelationshipKind kind) noexcept;

// Decoded MAP assignment over the variables of a factor graph.
struct AssignmentGraph {
  RelationshipKind kind = RelationshipKind::Equivalence;
  std::vector<std::uint8_t> labels;
  // belief(1) - belief(0) per variable; empty for exact decoding.
  std::vector<double> margins;
  // Unnormalized joint log-potential; kNegInf when any clique is invalid.
  double log_score = 0.0;
  // Ternary clique ids whose decoded configuration has zero potential.
  std::vector<std::size_t> violations;

  std::size_t iterations = 0;
  bool converged = true;
  double final_delta = 0.0;
  std::size_t violations_before_repair = 0;
  std::size_t repair_flips = 0;
};

}  // namespace relgraph
