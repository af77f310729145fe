#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "relgraph/model.hpp"

namespace relgraph {

using Clique = std::array<VariableId, 3>;
using PriorMap = std::map<std::size_t, PriorBelief>;  // keyed by variable_index

enum class GraphMode { Dense, Sparse };

// Ternary cliques over a set of pairs. A clique is emitted only when all
// three pairs it needs exist. Variables inside a clique are ordered
// (r_ij, r_jk, r_ik); cliques are ordered by concept triple i < j < k and,
// for ParentChild, by orientation (a, b, c) in lexicographic order.
std::vector<Clique> enumerate_ternary_cliques(std::span<const ConceptPair> pairs,
                                              RelationshipKind kind);

struct GraphStats {
  std::uint64_t variables = 0;
  std::uint64_t ternary_factors = 0;
  std::uint64_t edges = 0;

  std::uint64_t factors() const { return variables + ternary_factors; }
  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

// Closed-form counts for the dense graph over n concepts.
GraphStats count_graph_stats(std::size_t n, RelationshipKind kind);

// Bipartite factor graph: one unary factor per variable plus ternary
// factors sharing a single log table.
//
// Factor ids: [0, V) are unary (factor v belongs to variable v), [V, V+T)
// are ternary. Edge ids: edge v joins variable v to its unary factor; edge
// V + 3t + s joins ternary factor t to the variable in its slot s.
class FactorGraph {
 public:
  // `variables` must hold canonical, distinct pairs over concepts < n.
  static FactorGraph build(std::size_t n_concepts, RelationshipKind kind,
                           std::vector<RelationshipVariable> variables,
                           const TernaryPotential& potential);

  RelationshipKind kind() const noexcept { return structure_->kind; }
  std::size_t concept_count() const noexcept { return structure_->n_concepts; }
  std::size_t variable_count() const noexcept { return structure_->variables.size(); }
  std::size_t ternary_count() const noexcept { return structure_->cliques.size(); }
  std::size_t factor_count() const noexcept { return variable_count() + ternary_count(); }
  std::size_t edge_count() const noexcept { return variable_count() + 3 * ternary_count(); }

  std::span<const RelationshipVariable> variables() const noexcept {
    return structure_->variables;
  }
  const RelationshipVariable& variable(VariableId v) const { return structure_->variables[v]; }
  // [ln p_zero, ln p_one]
  const std::array<double, 2>& unary_log(VariableId v) const { return structure_->unary[v]; }
  std::span<const Clique> cliques() const noexcept { return structure_->cliques; }
  const std::array<double, 8>& log_table() const noexcept { return log_table_; }

  std::span<const std::uint32_t> variable_edges(VariableId v) const {
    const auto& s = *structure_;
    return std::span<const std::uint32_t>(s.edges).subspan(
        s.edge_offsets[v], s.edge_offsets[v + 1] - s.edge_offsets[v]);
  }
  std::size_t degree(VariableId v) const { return variable_edges(v).size(); }
  std::size_t edge_factor(std::size_t edge) const noexcept {
    const std::size_t nv = variable_count();
    return edge < nv ? edge : nv + (edge - nv) / 3;
  }
  std::size_t edge_variable(std::size_t edge) const noexcept {
    const std::size_t nv = variable_count();
    return edge < nv ? edge : structure_->cliques[(edge - nv) / 3][(edge - nv) % 3];
  }
  // Variables touched by factor f (1 for unary, 3 for ternary).
  std::vector<VariableId> factor_variables(std::size_t factor) const;

  std::optional<VariableId> find(ConceptPair pair) const;

  // Same structure and priors with a different shared ternary table.
  FactorGraph with_potential(const TernaryPotential& potential) const;
  // Multiplies every ternary entry by c > 0 (adds ln c in log domain).
  FactorGraph with_scaled_ternary(double c) const;

 private:
  struct Structure {
    RelationshipKind kind = RelationshipKind::Equivalence;
    std::size_t n_concepts = 0;
    std::vector<RelationshipVariable> variables;
    std::vector<std::array<double, 2>> unary;
    std::vector<Clique> cliques;
    std::vector<std::uint32_t> edge_offsets;
    std::vector<std::uint32_t> edges;
    std::vector<std::pair<std::uint64_t, VariableId>> lookup;  // sorted by key
  };

  std::shared_ptr<const Structure> structure_;
  std::array<double, 8> log_table_{};
};

struct GraphOptions {
  GraphMode mode = GraphMode::Dense;
  // Sparse mode candidates; when empty the listed prior pairs are used.
  std::vector<ConceptPair> pairs;
  // Strict: every variable must have a listed prior.
  bool strict = false;
  double default_p_one = kDefaultPrior;
};

// Dense mode creates every pair over the vocabulary (all ordered pairs for
// ParentChild); sparse mode creates only the candidate pairs. Unlisted
// pairs receive `default_p_one` unless strict.
FactorGraph build_factor_graph(std::span<const Concept> concepts,
                               const PriorMap& priors,
                               const TernaryPotential& potential,
                               const GraphOptions& options = {});

}  // namespace relgraph
