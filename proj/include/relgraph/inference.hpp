#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relgraph/graph.hpp"
#include "relgraph/model.hpp"

namespace relgraph {

struct LbpConfig {
  std::size_t max_iterations = 200;
  double damping = 0.5;       // weight kept from the previous message
  double tolerance = 1e-6;    // stop when max |message change| drops below
  std::uint64_t seed = 0;
  std::size_t threads = 1;    // edge-parallel workers within one graph
  bool repair = false;
  std::size_t repair_budget = 0;  // greedy flips; 0 means one per variable

  void validate() const;
};

// Log-domain message over the two states of a binary variable.
using LogMessage = std::array<double, 2>;

// Shifts so that the larger component is 0. A message with both components
// at kNegInf becomes uniform.
LogMessage normalize(LogMessage m) noexcept;

// Flat per-edge message storage; see FactorGraph for the edge layout.
struct MessageStore {
  explicit MessageStore(const FactorGraph& graph)
      : to_factor(graph.edge_count(), LogMessage{0.0, 0.0}),
        to_variable(graph.edge_count(), LogMessage{0.0, 0.0}) {}

  std::vector<LogMessage> to_factor;    // variable -> factor
  std::vector<LogMessage> to_variable;  // factor -> variable
};

// Sum of the latest factor->variable messages into `variable`, excluding
// the one from `target_factor`, normalized.
LogMessage variable_to_factor_message(const FactorGraph& graph,
                                      const MessageStore& store,
                                      VariableId variable,
                                      std::size_t target_factor);

// Max-sum message from `factor` to `target`: the unary log-potential for a
// unary factor; for a ternary factor, a max over the four configurations of
// the other two variables of table + their incoming messages. Normalized.
LogMessage factor_to_variable_message(const FactorGraph& graph,
                                      const MessageStore& store,
                                      std::size_t factor, VariableId target);

// Synchronous max-sum loopy belief propagation. Each step() computes every
// variable->factor message from the previous round's factor->variable
// messages, then every factor->variable message. Variable->factor and
// ternary factor->variable messages are damped; unary messages are the
// normalized prior every round.
class LbpSolver {
 public:
  LbpSolver(const FactorGraph& graph, LbpConfig config);

  // One round; returns the max absolute change over all message components.
  double step();

  std::size_t iterations() const noexcept { return iterations_; }
  std::size_t updates_last_iteration() const noexcept { return updates_; }
  const MessageStore& messages() const noexcept { return store_; }
  LogMessage belief(VariableId v) const;

  // Belief argmax per variable (ties go to 0) plus score and audit.
  AssignmentGraph decode() const;

 private:
  template <typename Fn>
  double run_chunks(std::size_t count, Fn&& fn) const;

  const FactorGraph& graph_;
  LbpConfig config_;
  MessageStore store_;
  std::size_t iterations_ = 0;
  std::size_t updates_ = 0;
};

// Per-iteration message update count: one message each way per edge.
constexpr std::size_t messages_per_iteration(std::size_t variables,
                                             std::size_t ternary_factors) {
  return 2 * (variables + 3 * ternary_factors);
}

AssignmentGraph lbp_map(const FactorGraph& graph, const LbpConfig& config = {});

inline constexpr std::size_t kOracleMaxVariables = 25;

// Exhaustive MAP over all 2^V assignments; ties go to the lexicographically
// smallest label vector. Throws ConfigError above kOracleMaxVariables.
AssignmentGraph exact_map_oracle(const FactorGraph& graph);

// Sum of unary and ternary log-potentials; kNegInf if any clique is invalid.
double joint_log_score(const FactorGraph& graph, std::span<const std::uint8_t> labels);

// Ids of cliques whose configuration has zero potential.
std::vector<std::size_t> find_violations(const FactorGraph& graph,
                                         std::span<const std::uint8_t> labels);

// Greedy repair: flips the not-yet-flipped variable with the smallest
// |margin| among those in violating cliques, up to `budget` flips. Any
// violations left are closed by setting the zero entry of each violating
// clique to 1, which terminates with no violations.
AssignmentGraph repair_assignment(const FactorGraph& graph, AssignmentGraph assignment,
                                  std::size_t budget);

}  // namespace relgraph
