#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relgraph/embedding.hpp"
#include "relgraph/graph.hpp"
#include "relgraph/inference.hpp"
#include "relgraph/model.hpp"

namespace relgraph {

struct PartitionConfig {
  std::size_t k = 8;  // neighbors per anchor
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  double default_p_one = kDefaultPrior;  // for neighbor-induced pairs

  void validate() const;
};

// Local MRF for one left concept. Its variables are the anchor's input
// pairs plus every pair among {anchor} and its top-k neighbors (both
// orientations for ParentChild); ternary factors close over those pairs.
struct Partition {
  ConceptId anchor = 0;
  std::vector<ConceptId> neighbors;
  std::vector<std::size_t> test_pairs;       // indices into the input pair list
  std::vector<VariableId> test_variables;    // local variable of each test pair
  FactorGraph local_graph;
};

// Groups `pairs` (canonical, distinct) by left concept. Pairs missing from
// `priors` get config.default_p_one. Partitions are ordered by anchor.
std::vector<Partition> build_partitions(std::span<const ConceptPair> pairs,
                                        const PriorMap& priors, std::size_t concept_count,
                                        const EmbeddingSet& embeddings,
                                        const TernaryPotential& potential,
                                        const PartitionConfig& config);

struct PartitionReport {
  ConceptId anchor = 0;
  std::size_t variables = 0;
  std::size_t ternary_factors = 0;
  std::size_t iterations = 0;
  bool converged = true;
  std::size_t violations = 0;
  double log_score = 0.0;
};

// `merged` labels/margins are aligned with the input pair list. Its
// log_score sums the local scores, and `violations` holds one partition
// index per violating local clique.
struct PartitionedAssignment {
  AssignmentGraph merged;
  std::vector<PartitionReport> reports;
};

// Decodes every partition with lbp_map on a pool of `workers` threads and
// merges by anchor order; output does not depend on the worker count.
PartitionedAssignment infer_partitions_parallel(std::span<const Partition> partitions,
                                                std::size_t pair_count,
                                                const LbpConfig& lbp_config,
                                                std::size_t workers);

}  // namespace relgraph
