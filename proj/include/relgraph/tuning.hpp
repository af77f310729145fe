#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "relgraph/graph.hpp"
#include "relgraph/inference.hpp"
#include "relgraph/model.hpp"

namespace relgraph {

struct Range {
  double lower = 0.0;
  double upper = 1.0;
};

struct TrialConfig {
  std::vector<double> theta;  // TernaryPotential::from_theta order, unnormalized
  double damping = 0.5;
  std::size_t max_iterations = 200;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

// One range per potential parameter, θ1 included, in
// TernaryPotential::from_theta order. Sampled vectors are normalized by
// their maximum when the potential is built. Per-factor ratios compound
// over every clique a pair belongs to, so the default ranges are [0.5, 1].
struct SearchSpace {
  RelationshipKind kind = RelationshipKind::Equivalence;
  std::vector<Range> theta_ranges;
  Range damping{0.0, 0.95};
  std::vector<std::size_t> iteration_choices{50, 100, 200};

  static SearchSpace default_for(RelationshipKind kind);
  void validate() const;
  bool contains(const TrialConfig& config) const;
};

// Default potential, damping 0.5 and 200 iterations.
TrialConfig default_trial_config(RelationshipKind kind);

struct TrialRecord {
  std::size_t trial = 0;
  TrialConfig config;
  double objective = 0.0;  // validation F1
  double wall_seconds = 0.0;
};

struct TuningProblem {
  RelationshipKind kind = RelationshipKind::Equivalence;
  std::function<FactorGraph(const TernaryPotential&)> build;
  std::vector<VariableId> eval_variables;
  std::vector<std::uint8_t> gold;  // aligned with eval_variables
  LbpConfig lbp;                   // damping/max_iterations overridden per trial

  // Reuses `graph`'s structure and swaps in each trial's potential.
  static TuningProblem from_graph(FactorGraph graph, std::vector<VariableId> eval_variables,
                                  std::vector<std::uint8_t> gold);
};

// Builds the MRF under `config`, decodes it with lbp_map and returns the
// positive-class F1 over the evaluation variables.
double evaluate_config(const TrialConfig& config, const TuningProblem& problem);

struct TuningResult {
  TrialRecord best;
  std::vector<TrialRecord> history;  // by trial index
};

// Trial 0 is default_trial_config, used as is even when it lies outside
// `space`, so the result never scores below the defaults. Trials up to
// ceil(budget/2) are uniform samples; later trials are Gaussian
// perturbations (sigma = 10% of each range) around the incumbent, clipped
// to the space and drawn in fixed batches so the history does not depend
// on `workers`. Best = highest F1, earliest on ties.
TuningResult tune(const SearchSpace& space, const TuningProblem& problem, std::size_t budget,
                  std::uint64_t seed, std::size_t workers = 1);

}  // namespace relgraph
