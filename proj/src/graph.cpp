#include "relgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relgraph/errors.hpp"

namespace relgraph {

namespace {

std::uint64_t pair_key(ConceptPair p) {
  return (static_cast<std::uint64_t>(p.left) << 32) | p.right;
}

// Sorted lookup from canonical pair key to variable id.
class PairLookup {
 public:
  explicit PairLookup(std::span<const ConceptPair> pairs) {
    entries_.reserve(pairs.size());
    for (std::size_t v = 0; v < pairs.size(); ++v) {
      entries_.emplace_back(pair_key(pairs[v]), static_cast<VariableId>(v));
    }
    std::sort(entries_.begin(), entries_.end());
  }

  std::optional<VariableId> find(ConceptId a, ConceptId b) const {
    const std::uint64_t key = pair_key({a, b});
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), key,
        [](const auto& e, std::uint64_t k) { return e.first < k; });
    if (it == entries_.end() || it->first != key) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::pair<std::uint64_t, VariableId>> entries_;
};

std::uint64_t choose3(std::uint64_t n) {
  return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
}

}  // namespace

std::vector<Clique> enumerate_ternary_cliques(std::span<const ConceptPair> pairs,
                                              RelationshipKind kind) {
  // Undirected adjacency over compacted concept ids; compaction preserves
  // order so triples come out sorted by global id.
  std::vector<ConceptId> ids;
  ids.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    ids.push_back(p.left);
    ids.push_back(p.right);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto local = [&](ConceptId c) {
    return static_cast<std::uint32_t>(
        std::lower_bound(ids.begin(), ids.end(), c) - ids.begin());
  };

  std::vector<std::vector<std::uint32_t>> adj(ids.size());
  for (const auto& p : pairs) {
    const auto a = local(p.left);
    const auto b = local(p.right);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  const PairLookup lookup(pairs);
  std::vector<Clique> cliques;
  std::vector<std::uint32_t> common;
  for (std::uint32_t i = 0; i < adj.size(); ++i) {
    for (std::uint32_t j : adj[i]) {
      if (j <= i) continue;
      common.clear();
      std::set_intersection(adj[i].begin(), adj[i].end(), adj[j].begin(),
                            adj[j].end(), std::back_inserter(common));
      for (std::uint32_t k : common) {
        if (k <= j) continue;
        const ConceptId ci = ids[i], cj = ids[j], ck = ids[k];
        if (kind == RelationshipKind::Equivalence) {
          cliques.push_back({*lookup.find(ci, cj), *lookup.find(cj, ck),
                             *lookup.find(ci, ck)});
          continue;
        }
        // Every orientation a -> b -> c with a -> c present.
        const std::array<std::array<ConceptId, 3>, 6> orientations{{
            {ci, cj, ck}, {ci, ck, cj}, {cj, ci, ck},
            {cj, ck, ci}, {ck, ci, cj}, {ck, cj, ci},
        }};
        for (const auto& [a, b, c] : orientations) {
          auto ab = lookup.find(a, b);
          auto bc = lookup.find(b, c);
          auto ac = lookup.find(a, c);
          if (ab && bc && ac) cliques.push_back({*ab, *bc, *ac});
        }
      }
    }
  }
  return cliques;
}

GraphStats count_graph_stats(std::size_t n, RelationshipKind kind) {
  if (n < 2) throw std::domain_error("graph statistics need n >= 2");
  GraphStats s;
  const std::uint64_t nn = n;
  if (kind == RelationshipKind::Equivalence) {
    s.variables = nn * (nn - 1) / 2;
    s.ternary_factors = choose3(nn);
  } else {
    s.variables = nn * (nn - 1);
    s.ternary_factors = 6 * choose3(nn);
  }
  s.edges = s.variables + 3 * s.ternary_factors;
  return s;
}

FactorGraph FactorGraph::build(std::size_t n_concepts, RelationshipKind kind,
                               std::vector<RelationshipVariable> variables,
                               const TernaryPotential& potential) {
  if (potential.kind() != kind) {
    throw ConfigError("potential kind does not match graph kind");
  }
  auto s = std::make_shared<Structure>();
  s->kind = kind;
  s->n_concepts = n_concepts;

  std::vector<ConceptPair> pairs;
  pairs.reserve(variables.size());
  for (const auto& v : variables) {
    if (v.pair.left >= n_concepts || v.pair.right >= n_concepts) {
      throw ConfigError("variable references unknown concept id");
    }
    if (canonical_pair(v.pair, kind) != v.pair) {
      throw ConfigError("variable pair is not canonical");
    }
    pairs.push_back(v.pair);
  }
  s->variables = std::move(variables);
  s->cliques = enumerate_ternary_cliques(pairs, kind);

  s->unary.reserve(s->variables.size());
  for (const auto& v : s->variables) {
    s->unary.push_back({std::log(v.prior.p_zero()), std::log(v.prior.p_one())});
  }

  s->lookup.reserve(pairs.size());
  for (std::size_t v = 0; v < pairs.size(); ++v) {
    s->lookup.emplace_back(pair_key(pairs[v]), static_cast<VariableId>(v));
  }
  std::sort(s->lookup.begin(), s->lookup.end());
  for (std::size_t i = 1; i < s->lookup.size(); ++i) {
    if (s->lookup[i].first == s->lookup[i - 1].first) {
      throw ConfigError("duplicate variable pair");
    }
  }

  // CSR adjacency: unary edge first, then ternary edges in factor order.
  const std::size_t nv = s->variables.size();
  std::vector<std::uint32_t> degree(nv, 1);
  for (const auto& c : s->cliques) {
    for (VariableId v : c) ++degree[v];
  }
  s->edge_offsets.assign(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    s->edge_offsets[v + 1] = s->edge_offsets[v] + degree[v];
  }
  s->edges.resize(s->edge_offsets[nv]);
  std::vector<std::uint32_t> fill(s->edge_offsets.begin(), s->edge_offsets.end() - 1);
  for (std::size_t v = 0; v < nv; ++v) {
    s->edges[fill[v]++] = static_cast<std::uint32_t>(v);
  }
  for (std::size_t t = 0; t < s->cliques.size(); ++t) {
    for (std::size_t slot = 0; slot < 3; ++slot) {
      const VariableId v = s->cliques[t][slot];
      s->edges[fill[v]++] = static_cast<std::uint32_t>(nv + 3 * t + slot);
    }
  }

  FactorGraph g;
  g.structure_ = std::move(s);
  g.log_table_ = potential.log_table();
  return g;
}

std::vector<VariableId> FactorGraph::factor_variables(std::size_t factor) const {
  const std::size_t nv = variable_count();
  if (factor < nv) return {static_cast<VariableId>(factor)};
  const Clique& c = structure_->cliques.at(factor - nv);
  return {c[0], c[1], c[2]};
}

std::optional<VariableId> FactorGraph::find(ConceptPair pair) const {
  if (pair.left == pair.right) return std::nullopt;
  const std::uint64_t key = pair_key(canonical_pair(pair, kind()));
  const auto& lookup = structure_->lookup;
  auto it = std::lower_bound(
      lookup.begin(), lookup.end(), key,
      [](const auto& e, std::uint64_t k) { return e.first < k; });
  if (it == lookup.end() || it->first != key) return std::nullopt;
  return it->second;
}

FactorGraph FactorGraph::with_potential(const TernaryPotential& potential) const {
  if (potential.kind() != kind()) {
    throw ConfigError("potential kind does not match graph kind");
  }
  FactorGraph g = *this;
  g.log_table_ = potential.log_table();
  return g;
}

FactorGraph FactorGraph::with_scaled_ternary(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::domain_error("ternary scale must be positive and finite");
  }
  FactorGraph g = *this;
  const double shift = std::log(c);
  for (double& v : g.log_table_) {
    if (v > kNegInf) v += shift;
  }
  return g;
}

FactorGraph build_factor_graph(std::span<const Concept> concepts,
                               const PriorMap& priors,
                               const TernaryPotential& potential,
                               const GraphOptions& options) {
  validate_vocabulary(concepts);
  const std::size_t n = concepts.size();
  const RelationshipKind kind = potential.kind();
  const PriorBelief fallback(options.default_p_one);

  std::vector<std::size_t> indices;
  if (options.mode == GraphMode::Dense) {
    indices.resize(dense_variable_count(n, kind));
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  } else if (options.pairs.empty()) {
    for (const auto& [index, prior] : priors) indices.push_back(index);
  } else {
    for (const auto& p : options.pairs) {
      indices.push_back(variable_index(p.left, p.right, n, kind));
    }
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
      throw ConfigError("candidate pair list contains a duplicate pair");
    }
  }

  std::vector<RelationshipVariable> variables;
  variables.reserve(indices.size());
  for (std::size_t index : indices) {
    const ConceptPair pair = pair_from_index(index, n, kind);
    auto it = priors.find(index);
    if (it == priors.end() && options.strict) {
      throw ConfigError("no prior for pair (" + std::to_string(pair.left) + ", " +
                        std::to_string(pair.right) + ")");
    }
    variables.push_back({pair, it == priors.end() ? fallback : it->second});
  }
  return FactorGraph::build(n, kind, std::move(variables), potential);
}

}  // namespace relgraph
