#include "relgraph/partition.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>

#include "relgraph/errors.hpp"
#include "relgraph/parallel.hpp"

namespace relgraph {

void PartitionConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

std::vector<Partition> build_partitions(std::span<const ConceptPair> pairs,
                                        const PriorMap& priors, std::size_t concept_count,
                                        const EmbeddingSet& embeddings,
                                        const TernaryPotential& potential,
                                        const PartitionConfig& config) {
  config.validate();
  if (pairs.empty()) throw ConfigError("no candidate pairs to partition");
  const RelationshipKind kind = potential.kind();
  const std::size_t n = concept_count;

  std::map<ConceptId, std::vector<std::size_t>> groups;
  std::vector<std::size_t> seen;
  seen.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ConceptPair p = pairs[i];
    if (p.left >= n || p.right >= n) throw ConfigError("pair references unknown concept");
    if (canonical_pair(p, kind) != p) throw ConfigError("pair list must be canonical");
    seen.push_back(variable_index(p.left, p.right, n, kind));
    groups[p.left].push_back(i);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw ConfigError("pair list contains a duplicate pair");
  }

  std::vector<std::pair<ConceptId, std::vector<std::size_t>>> work(groups.begin(), groups.end());
  std::vector<Partition> out(work.size());
  const PriorBelief fallback(config.default_p_one);
  if (embeddings.embedded_count() < 2) throw ConfigError("neighbor search needs 2+ embedded concepts");
  const std::size_t k = std::min(config.k, embeddings.embedded_count() - 1);
  if (k < config.k) {
    std::cerr << "warning: k = " << config.k << " clipped to " << k << "\n";
  }

  parallel_for(work.size(), config.workers, [&](std::size_t w) {
    const auto& [anchor, members] = work[w];
    Partition& part = out[w];
    part.anchor = anchor;
    part.test_pairs = members;
    part.neighbors = top_k_neighbors(anchor, embeddings, k);

    std::vector<ConceptId> local{anchor};
    local.insert(local.end(), part.neighbors.begin(), part.neighbors.end());
    std::vector<std::size_t> indices;
    for (std::size_t i : members) indices.push_back(variable_index(pairs[i].left, pairs[i].right, n, kind));
    for (ConceptId a : local) {
      for (ConceptId b : local) {
        if (a == b) continue;
        if (kind == RelationshipKind::Equivalence && a > b) continue;
        indices.push_back(variable_index(a, b, n, kind));
      }
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

    std::vector<RelationshipVariable> variables;
    variables.reserve(indices.size());
    for (std::size_t index : indices) {
      auto it = priors.find(index);
      variables.push_back({pair_from_index(index, n, kind),
                           it == priors.end() ? fallback : it->second});
    }
    part.local_graph = FactorGraph::build(n, kind, std::move(variables), potential);
    for (std::size_t i : members) part.test_variables.push_back(*part.local_graph.find(pairs[i]));
  });
  return out;
}

PartitionedAssignment infer_partitions_parallel(std::span<const Partition> partitions,
                                                std::size_t pair_count,
                                                const LbpConfig& lbp_config,
                                                std::size_t workers) {
  std::vector<AssignmentGraph> local(partitions.size());
  lbp_config.validate();
  parallel_for(partitions.size(), workers, [&](std::size_t p) {
    try {
      local[p] = lbp_map(partitions[p].local_graph, lbp_config);
    } catch (const std::exception& e) {
      throw std::runtime_error("partition " + std::to_string(p) + " (anchor " +
                               std::to_string(partitions[p].anchor) + "): " + e.what());
    }
  });

  PartitionedAssignment out;
  AssignmentGraph& merged = out.merged;
  merged.labels.assign(pair_count, 0);
  merged.margins.assign(pair_count, 0.0);
  std::vector<std::uint8_t> covered(pair_count, 0);
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    const Partition& part = partitions[p];
    const AssignmentGraph& a = local[p];
    merged.kind = part.local_graph.kind();
    for (std::size_t t = 0; t < part.test_pairs.size(); ++t) {
      const std::size_t i = part.test_pairs[t];
      if (i >= pair_count || covered[i]) {
        throw std::invalid_argument("partitions overlap on input pair " + std::to_string(i));
      }
      covered[i] = 1;
      merged.labels[i] = a.labels[part.test_variables[t]];
      merged.margins[i] = a.margins[part.test_variables[t]];
    }
    merged.log_score = sat_add(merged.log_score, a.log_score);
    merged.iterations = std::max(merged.iterations, a.iterations);
    merged.converged = merged.converged && a.converged;
    merged.final_delta = std::max(merged.final_delta, a.final_delta);
    merged.violations_before_repair += a.violations_before_repair;
    merged.repair_flips += a.repair_flips;
    merged.violations.insert(merged.violations.end(), a.violations.size(), p);
    out.reports.push_back({part.anchor, part.local_graph.variable_count(),
                           part.local_graph.ternary_count(), a.iterations, a.converged,
                           a.violations.size(), a.log_score});
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw std::invalid_argument("partitions do not cover every input pair");
  }
  return out;
}

}  // namespace relgraph
