#include "relgraph/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>

#include "relgraph/errors.hpp"
#include "relgraph/eval.hpp"
#include "relgraph/parallel.hpp"

namespace relgraph {

namespace {

constexpr std::size_t kExploitBatch = 4;
constexpr double kPerturbScale = 0.1;
constexpr double kResampleIterations = 0.25;

TrialConfig sample_uniform(const SearchSpace& space, std::mt19937_64& rng) {
  TrialConfig c;
  for (const Range& r : space.theta_ranges) {
    c.theta.push_back(std::uniform_real_distribution<double>(r.lower, r.upper)(rng));
  }
  c.damping = std::uniform_real_distribution<double>(space.damping.lower, space.damping.upper)(rng);
  c.max_iterations = space.iteration_choices[std::uniform_int_distribution<std::size_t>(
      0, space.iteration_choices.size() - 1)(rng)];
  return c;
}

double perturb(double x, const Range& r, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, kPerturbScale * (r.upper - r.lower));
  return std::clamp(x + noise(rng), r.lower, r.upper);
}

TrialConfig sample_near(const SearchSpace& space, const TrialConfig& incumbent,
                        std::mt19937_64& rng) {
  TrialConfig c = incumbent;
  for (std::size_t p = 0; p < space.theta_ranges.size(); ++p) {
    c.theta[p] = perturb(c.theta[p], space.theta_ranges[p], rng);
  }
  c.damping = perturb(c.damping, space.damping, rng);
  if (std::bernoulli_distribution(kResampleIterations)(rng)) {
    c.max_iterations = space.iteration_choices[std::uniform_int_distribution<std::size_t>(
        0, space.iteration_choices.size() - 1)(rng)];
  }
  return c;
}

}  // namespace

SearchSpace SearchSpace::default_for(RelationshipKind kind) {
  SearchSpace s;
  s.kind = kind;
  s.theta_ranges.assign(TernaryPotential::parameter_count(kind), Range{0.5, 1.0});
  return s;
}

void SearchSpace::validate() const {
  if (theta_ranges.size() != TernaryPotential::parameter_count(kind)) {
    throw ConfigError("search space has the wrong number of potential parameters");
  }
  for (const Range& r : theta_ranges) {
    if (!(r.lower > 0.0 && r.lower < r.upper && r.upper <= 1.0)) {
      throw ConfigError("potential ranges must satisfy 0 < lower < upper <= 1");
    }
  }
  if (!(damping.lower >= 0.0 && damping.lower < damping.upper && damping.upper < 1.0)) {
    throw ConfigError("damping range must satisfy 0 <= lower < upper < 1");
  }
  if (iteration_choices.empty()) throw ConfigError("no iteration choices");
  for (std::size_t it : iteration_choices) {
    if (it == 0) throw ConfigError("iteration choices must be positive");
  }
}

bool SearchSpace::contains(const TrialConfig& config) const {
  if (config.theta.size() != theta_ranges.size()) return false;
  for (std::size_t p = 0; p < theta_ranges.size(); ++p) {
    const double v = config.theta[p];
    if (v < theta_ranges[p].lower || v > theta_ranges[p].upper) return false;
  }
  if (config.damping < damping.lower || config.damping > damping.upper) return false;
  return std::find(iteration_choices.begin(), iteration_choices.end(), config.max_iterations) !=
         iteration_choices.end();
}

TrialConfig default_trial_config(RelationshipKind kind) {
  TrialConfig c;
  c.theta = TernaryPotential::default_for(kind).theta();
  c.damping = 0.5;
  c.max_iterations = 200;
  return c;
}

TuningProblem TuningProblem::from_graph(FactorGraph graph,
                                        std::vector<VariableId> eval_variables,
                                        std::vector<std::uint8_t> gold) {
  TuningProblem p;
  p.kind = graph.kind();
  p.build = [graph = std::move(graph)](const TernaryPotential& potential) {
    return graph.with_potential(potential);
  };
  p.eval_variables = std::move(eval_variables);
  p.gold = std::move(gold);
  return p;
}

double evaluate_config(const TrialConfig& config, const TuningProblem& problem) {
  if (problem.eval_variables.size() != problem.gold.size()) {
    throw std::invalid_argument("evaluation variables and gold labels differ in length");
  }
  const FactorGraph graph =
      problem.build(TernaryPotential::from_theta(problem.kind, config.theta));
  LbpConfig lbp = problem.lbp;
  lbp.damping = config.damping;
  lbp.max_iterations = config.max_iterations;
  const AssignmentGraph decoded = lbp_map(graph, lbp);
  std::vector<std::uint8_t> predicted;
  predicted.reserve(problem.eval_variables.size());
  for (VariableId v : problem.eval_variables) predicted.push_back(decoded.labels.at(v));
  return prf1(predicted, problem.gold).f1;
}

TuningResult tune(const SearchSpace& space, const TuningProblem& problem, std::size_t budget,
                  std::uint64_t seed, std::size_t workers) {
  space.validate();
  if (space.kind != problem.kind) throw ConfigError("search space and problem kinds differ");
  if (budget < 1) throw ConfigError("tuning budget must be at least 1");
  if (std::count(problem.gold.begin(), problem.gold.end(), 1) == 0) {
    throw ConfigError("validation labels contain no positive pair");
  }

  std::mt19937_64 rng(seed);
  TuningResult result;
  auto run_batch = [&](std::vector<TrialConfig> configs) {
    const std::size_t first = result.history.size();
    std::vector<TrialRecord> records(configs.size());
    parallel_for(configs.size(), workers, [&](std::size_t i) {
      const auto start = std::chrono::steady_clock::now();
      records[i].trial = first + i;
      records[i].config = std::move(configs[i]);
      records[i].objective = evaluate_config(records[i].config, problem);
      records[i].wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    for (auto& r : records) {
      if (result.history.empty() || r.objective > result.best.objective) result.best = r;
      result.history.push_back(std::move(r));
    }
  };

  const std::size_t explore = (budget + 1) / 2;
  std::vector<TrialConfig> initial{default_trial_config(space.kind)};
  while (initial.size() < explore) initial.push_back(sample_uniform(space, rng));
  run_batch(std::move(initial));

  while (result.history.size() < budget) {
    const std::size_t size = std::min(kExploitBatch, budget - result.history.size());
    std::vector<TrialConfig> batch;
    for (std::size_t i = 0; i < size; ++i) {
      batch.push_back(sample_near(space, result.best.config, rng));
    }
    run_batch(std::move(batch));
  }
  return result;
}

}  // namespace relgraph
