#include "relgraph/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relgraph/errors.hpp"
#include "relgraph/parallel.hpp"

namespace relgraph {

namespace {

constexpr std::array<std::size_t, 3> kSlotBit{4, 2, 1};

// Ternary factor -> slot message given the two other incoming messages.
LogMessage ternary_message(const std::array<double, 8>& table, std::size_t slot,
                           const LogMessage& in_a, const LogMessage& in_b) {
  const std::size_t a = (slot + 1) % 3;
  const std::size_t b = (slot + 2) % 3;
  LogMessage out{kNegInf, kNegInf};
  for (int x = 0; x < 2; ++x) {
    for (int ya = 0; ya < 2; ++ya) {
      for (int yb = 0; yb < 2; ++yb) {
        const std::size_t cfg = x * kSlotBit[slot] + ya * kSlotBit[a] + yb * kSlotBit[b];
        const double v = sat_add(sat_add(table[cfg], in_a[ya]), in_b[yb]);
        out[x] = std::max(out[x], v);
      }
    }
  }
  return normalize(out);
}

std::size_t clique_config(const Clique& c, std::span<const std::uint8_t> labels) {
  return config_index(labels[c[0]], labels[c[1]], labels[c[2]]);
}

double max_abs_change(const LogMessage& a, const LogMessage& b) {
  return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

LogMessage damp(const LogMessage& old, const LogMessage& computed, double keep) {
  return normalize({keep * old[0] + (1.0 - keep) * computed[0],
                    keep * old[1] + (1.0 - keep) * computed[1]});
}

}  // namespace

void LbpConfig::validate() const {
  if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("damping must lie in [0, 1)");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (threads == 0) throw ConfigError("threads must be positive");
}

LogMessage normalize(LogMessage m) noexcept {
  const double top = std::max(m[0], m[1]);
  if (top <= kNegInf) return {0.0, 0.0};
  return {std::max(m[0] - top, kNegInf), std::max(m[1] - top, kNegInf)};
}

LogMessage variable_to_factor_message(const FactorGraph& graph,
                                      const MessageStore& store,
                                      VariableId variable,
                                      std::size_t target_factor) {
  LogMessage sum{0.0, 0.0};
  for (std::uint32_t e : graph.variable_edges(variable)) {
    if (graph.edge_factor(e) == target_factor) continue;
    sum[0] = sat_add(sum[0], store.to_variable[e][0]);
    sum[1] = sat_add(sum[1], store.to_variable[e][1]);
  }
  return normalize(sum);
}

LogMessage factor_to_variable_message(const FactorGraph& graph,
                                      const MessageStore& store,
                                      std::size_t factor, VariableId target) {
  const std::size_t nv = graph.variable_count();
  if (factor < nv) {
    if (factor != target) throw std::invalid_argument("variable not in unary factor");
    return normalize(graph.unary_log(target));
  }
  const std::size_t t = factor - nv;
  const Clique& c = graph.cliques()[t];
  const auto it = std::find(c.begin(), c.end(), target);
  if (it == c.end()) throw std::invalid_argument("variable not in ternary factor");
  const auto slot = static_cast<std::size_t>(it - c.begin());
  const std::size_t base = nv + 3 * t;
  return ternary_message(graph.log_table(), slot,
                         store.to_factor[base + (slot + 1) % 3],
                         store.to_factor[base + (slot + 2) % 3]);
}

LbpSolver::LbpSolver(const FactorGraph& graph, LbpConfig config)
    : graph_(graph), config_(config), store_(graph) {
  config_.validate();
}

template <typename Fn>
double LbpSolver::run_chunks(std::size_t count, Fn&& fn) const {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(config_.threads, count));
  std::vector<double> deltas(chunks, 0.0);
  parallel_for(chunks, chunks, [&](std::size_t w) {
    deltas[w] = fn(count * w / chunks, count * (w + 1) / chunks);
  });
  return chunks == 0 ? 0.0 : *std::max_element(deltas.begin(), deltas.end());
}

double LbpSolver::step() {
  const std::size_t nv = graph_.variable_count();
  const std::size_t nt = graph_.ternary_count();
  auto& to_factor = store_.to_factor;
  auto& to_variable = store_.to_variable;
  const double keep = config_.damping;

  // Variable -> factor: leave-one-out sums via prefix and suffix passes.
  const double delta_v = run_chunks(nv, [&](std::size_t begin, std::size_t end) {
    double delta = 0.0;
    std::vector<LogMessage> suffix;
    for (std::size_t v = begin; v < end; ++v) {
      const auto edges = graph_.variable_edges(static_cast<VariableId>(v));
      const std::size_t d = edges.size();
      suffix.assign(d + 1, LogMessage{0.0, 0.0});
      for (std::size_t i = d; i-- > 0;) {
        const LogMessage& in = to_variable[edges[i]];
        suffix[i] = {sat_add(suffix[i + 1][0], in[0]), sat_add(suffix[i + 1][1], in[1])};
      }
      LogMessage prefix{0.0, 0.0};
      for (std::size_t i = 0; i < d; ++i) {
        const LogMessage computed = normalize(
            {sat_add(prefix[0], suffix[i + 1][0]), sat_add(prefix[1], suffix[i + 1][1])});
        LogMessage& old = to_factor[edges[i]];
        const LogMessage next = damp(old, computed, keep);
        delta = std::max(delta, max_abs_change(next, old));
        old = next;
        const LogMessage& in = to_variable[edges[i]];
        prefix = {sat_add(prefix[0], in[0]), sat_add(prefix[1], in[1])};
      }
    }
    return delta;
  });

  // Unary factor -> variable: the (normalized) prior itself, undamped.
  double delta_u = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    const LogMessage next = normalize(graph_.unary_log(static_cast<VariableId>(v)));
    delta_u = std::max(delta_u, max_abs_change(next, to_variable[v]));
    to_variable[v] = next;
  }

  // Ternary factor -> variable, damped against the previous round.
  const auto& table = graph_.log_table();
  const double delta_t = run_chunks(nt, [&](std::size_t begin, std::size_t end) {
    double delta = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t base = nv + 3 * t;
      const std::array<LogMessage, 3> in{to_factor[base], to_factor[base + 1],
                                         to_factor[base + 2]};
      for (std::size_t slot = 0; slot < 3; ++slot) {
        const LogMessage computed =
            ternary_message(table, slot, in[(slot + 1) % 3], in[(slot + 2) % 3]);
        LogMessage& old = to_variable[base + slot];
        const LogMessage next = damp(old, computed, keep);
        delta = std::max(delta, max_abs_change(next, old));
        old = next;
      }
    }
    return delta;
  });

  ++iterations_;
  updates_ = 2 * graph_.edge_count();
  return std::max({delta_v, delta_u, delta_t});
}

LogMessage LbpSolver::belief(VariableId v) const {
  LogMessage b{0.0, 0.0};
  for (std::uint32_t e : graph_.variable_edges(v)) {
    b[0] = sat_add(b[0], store_.to_variable[e][0]);
    b[1] = sat_add(b[1], store_.to_variable[e][1]);
  }
  return b;
}

AssignmentGraph LbpSolver::decode() const {
  AssignmentGraph out;
  out.kind = graph_.kind();
  const std::size_t nv = graph_.variable_count();
  out.labels.resize(nv);
  out.margins.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const LogMessage b = belief(static_cast<VariableId>(v));
    out.labels[v] = b[1] > b[0] ? 1 : 0;
    out.margins[v] = b[1] - b[0];
  }
  out.log_score = joint_log_score(graph_, out.labels);
  out.violations = find_violations(graph_, out.labels);
  out.violations_before_repair = out.violations.size();
  out.iterations = iterations_;
  return out;
}

AssignmentGraph lbp_map(const FactorGraph& graph, const LbpConfig& config) {
  LbpSolver solver(graph, config);
  double delta = 0.0;
  bool converged = false;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    delta = solver.step();
    if (delta < config.tolerance) {
      converged = true;
      break;
    }
  }
  AssignmentGraph out = solver.decode();
  out.converged = converged;
  out.final_delta = delta;
  if (config.repair && !out.violations.empty()) {
    const std::size_t budget =
        config.repair_budget > 0 ? config.repair_budget : graph.variable_count();
    out = repair_assignment(graph, std::move(out), budget);
  }
  return out;
}

AssignmentGraph exact_map_oracle(const FactorGraph& graph) {
  const std::size_t nv = graph.variable_count();
  if (nv > kOracleMaxVariables) {
    throw ConfigError("exact oracle is capped at " + std::to_string(kOracleMaxVariables) +
                      " variables, graph has " + std::to_string(nv));
  }
  std::vector<std::uint8_t> labels(nv, 0);
  std::vector<std::uint8_t> best(nv, 0);
  double best_score = joint_log_score(graph, best);
  const std::uint64_t total = std::uint64_t{1} << nv;
  // Mask order with variable 0 as the most significant bit is
  // lexicographic order over label vectors.
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    for (std::size_t v = 0; v < nv; ++v) {
      labels[v] = static_cast<std::uint8_t>((mask >> (nv - 1 - v)) & 1U);
    }
    const double score = joint_log_score(graph, labels);
    if (score > best_score) {
      best_score = score;
      best = labels;
    }
  }
  AssignmentGraph out;
  out.kind = graph.kind();
  out.labels = std::move(best);
  out.log_score = best_score;
  out.violations = find_violations(graph, out.labels);
  out.violations_before_repair = out.violations.size();
  return out;
}

double joint_log_score(const FactorGraph& graph, std::span<const std::uint8_t> labels) {
  if (labels.size() != graph.variable_count()) {
    throw std::invalid_argument("label vector does not cover every variable");
  }
  double score = 0.0;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    score += graph.unary_log(static_cast<VariableId>(v))[labels[v] != 0];
  }
  const auto& table = graph.log_table();
  for (const Clique& c : graph.cliques()) {
    const double entry = table[clique_config(c, labels)];
    if (entry <= kNegInf) return kNegInf;
    score += entry;
  }
  return score;
}

std::vector<std::size_t> find_violations(const FactorGraph& graph,
                                         std::span<const std::uint8_t> labels) {
  std::vector<std::size_t> out;
  const auto cliques = graph.cliques();
  for (std::size_t t = 0; t < cliques.size(); ++t) {
    if (is_invalid_config(graph.kind(), clique_config(cliques[t], labels))) {
      out.push_back(t);
    }
  }
  return out;
}

AssignmentGraph repair_assignment(const FactorGraph& graph, AssignmentGraph assignment,
                                  std::size_t budget) {
  const std::size_t nv = graph.variable_count();
  const std::size_t nt = graph.ternary_count();
  auto& labels = assignment.labels;
  if (labels.size() != nv) throw std::invalid_argument("assignment does not match graph");

  std::vector<double> margin(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto& u = graph.unary_log(static_cast<VariableId>(v));
    margin[v] = assignment.margins.size() == nv ? assignment.margins[v] : u[1] - u[0];
  }

  const auto cliques = graph.cliques();
  std::vector<std::uint8_t> violated(nt, 0);
  std::vector<std::uint32_t> touching(nv, 0);  // violating cliques per variable
  std::size_t remaining = 0;
  auto refresh = [&](std::size_t t) {
    const bool bad = is_invalid_config(graph.kind(), clique_config(cliques[t], labels));
    if (bad == (violated[t] != 0)) return;
    violated[t] = bad;
    for (VariableId v : cliques[t]) bad ? ++touching[v] : --touching[v];
    bad ? ++remaining : --remaining;
  };
  auto flip = [&](VariableId v) {
    labels[v] ^= 1U;
    for (std::uint32_t e : graph.variable_edges(v)) {
      if (e >= nv) refresh((e - nv) / 3);
    }
  };
  for (std::size_t t = 0; t < nt; ++t) refresh(t);
  assignment.violations_before_repair = remaining;

  std::vector<std::uint8_t> frozen(nv, 0);
  std::size_t flips = 0;
  while (remaining > 0 && flips < budget) {
    std::size_t pick = nv;
    for (std::size_t v = 0; v < nv; ++v) {
      if (touching[v] == 0 || frozen[v]) continue;
      if (pick == nv || std::abs(margin[v]) < std::abs(margin[pick])) pick = v;
    }
    if (pick == nv) break;
    frozen[pick] = 1;
    flip(static_cast<VariableId>(pick));
    ++flips;
  }

  // Closure: every invalid configuration has a single 0 whose flip to 1
  // makes it valid. Flips are monotone, so this terminates.
  while (remaining > 0) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (!violated[t]) continue;
      const Clique& c = cliques[t];
      const VariableId zero = labels[c[2]] == 0 ? c[2] : (labels[c[1]] == 0 ? c[1] : c[0]);
      flip(zero);
      ++flips;
    }
  }

  assignment.repair_flips = flips;
  assignment.log_score = joint_log_score(graph, labels);
  assignment.violations = find_violations(graph, labels);
  return assignment;
}

}  // namespace relgraph
