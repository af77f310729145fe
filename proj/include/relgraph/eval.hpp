#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "relgraph/graph.hpp"
#include "relgraph/io.hpp"
#include "relgraph/model.hpp"

namespace relgraph {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  // Set when a zero denominator forced precision, recall or F1 to 0.
  bool zero_division = false;
};

// Positive class is label 1. Throws std::invalid_argument on coverage
// mismatch (different lengths or different pair sets).
Metrics prf1(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> gold);
Metrics prf1(const std::map<ConceptPair, std::uint8_t>& predicted,
             const std::map<ConceptPair, std::uint8_t>& gold);

struct ViolationAudit {
  std::size_t count = 0;
  std::vector<std::size_t> cliques;  // indices into the clique list
};

ViolationAudit count_transitivity_violations(std::span<const std::uint8_t> labels,
                                             std::span<const Clique> cliques,
                                             RelationshipKind kind);

struct SyntheticConfig {
  RelationshipKind kind = RelationshipKind::Equivalence;
  std::size_t n_concepts = 60;
  // Equivalence: number of clusters. ParentChild: number of tree roots.
  std::size_t n_clusters = 12;
  double prior_noise = 0.15;  // in [0, 0.5]
  // 0 emits every pair; otherwise the gold positives plus this many random
  // negative partners per concept (the sparse regime).
  std::size_t candidate_negatives = 0;
  double train_fraction = 0.4;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  RelationshipKind kind = RelationshipKind::Equivalence;
  std::vector<Concept> concepts;
  std::vector<ConceptPair> pairs;  // canonical, sorted by variable_index
  std::vector<std::uint8_t> gold;  // aligned with pairs
  std::vector<double> prior;       // p_one, aligned with pairs
  // Disjoint, class-stratified indices into `pairs`.
  std::vector<std::size_t> train, validation, test;
  // Cluster id per concept (Equivalence) or parent id, -1 for roots.
  std::vector<long> structure;

  PriorMap prior_map() const;
  std::vector<std::pair<ConceptPair, double>> prior_rows() const;
  std::vector<LabeledPair> labels(std::span<const std::size_t> split) const;
  std::vector<LabeledPair> all_labels() const;
};

// Equivalence: concepts split into clusters whose names share a cluster
// word. ParentChild: a random forest whose descendants extend their
// ancestors' names; gold is the transitive closure. Priors flip the gold
// label with probability prior_noise and draw a confidence from Beta(8, 2)
// folded above 0.5.
SyntheticDataset generate_synthetic(const SyntheticConfig& config);

}  // namespace relgraph
