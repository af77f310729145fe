// Acceptance runner: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "relgraph/cli.hpp"
#include "relgraph/eval.hpp"
#include "relgraph/inference.hpp"
#include "relgraph/partition.hpp"
#include "relgraph/priors.hpp"
#include "relgraph/tuning.hpp"

using namespace relgraph;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

// Shared across criteria for the transitivity audit.
struct AuditLog {
  std::size_t oracle_runs = 0, oracle_violating = 0;
  std::size_t lbp_runs = 0, lbp_violating = 0, lbp_violations = 0;
  std::vector<std::pair<FactorGraph, AssignmentGraph>> invalid;  // for repair checks

  void oracle(const AssignmentGraph& a) {
    ++oracle_runs;
    oracle_violating += !a.violations.empty();
  }
  void lbp(const FactorGraph& g, const AssignmentGraph& a) {
    ++lbp_runs;
    lbp_violations += a.violations.size();
    if (!a.violations.empty()) {
      ++lbp_violating;
      invalid.emplace_back(g, a);
    }
  }
};

std::vector<Concept> vocabulary(std::size_t n) {
  std::vector<Concept> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<ConceptId>(i), "c" + std::to_string(i), {}});
  return out;
}

// Gold-free Beta(8, 2) confidence toward a random state.
double beta_prior(std::mt19937_64& rng) {
  std::gamma_distribution<double> a(8.0, 1.0), b(2.0, 1.0);
  const double x = a(rng), y = b(rng);
  const double conf = x / (x + y);
  return std::bernoulli_distribution(0.5)(rng) ? conf : 1.0 - conf;
}

std::vector<double> random_theta(std::mt19937_64& rng, RelationshipKind kind) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> theta(TernaryPotential::parameter_count(kind));
  for (double& t : theta) t = u(rng);
  return theta;
}

FactorGraph random_dense(std::mt19937_64& rng, std::size_t n, RelationshipKind kind) {
  PriorMap priors;
  for (std::size_t v = 0; v < dense_variable_count(n, kind); ++v) priors[v] = PriorBelief(beta_prior(rng));
  return build_factor_graph(vocabulary(n), priors,
                            TernaryPotential::from_theta(kind, random_theta(rng, kind)));
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

void report(int id, const std::string& name, const Outcome& o, double secs) {
  std::printf("C%d %s %s:%s (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", name.c_str(),
              o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

// 1. Structural counts.
bool criterion1() {
  const auto start = Clock::now();
  Outcome o;
  const auto eq = RelationshipKind::Equivalence;
  const GraphStats big = count_graph_stats(1000, eq);
  o.require(big.variables == 499500, "n=1000 variables");
  o.require(big.ternary_factors == 166167000, "n=1000 ternary factors");
  o.require(count_graph_stats(46, eq).variables == 1035, "n=46 variables");
  const FactorGraph g = build_factor_graph(vocabulary(4), {}, TernaryPotential::default_for(eq));
  o.require(g.variable_count() == 6, "n=4 variables");
  o.require(g.factor_count() == 10, "n=4 factors");
  bool degree3 = true;
  for (VariableId v = 0; v < g.variable_count(); ++v) degree3 = degree3 && g.degree(v) == 3;
  o.require(degree3, "n=4 degrees");

  std::ostringstream out, err;
  const int code = cli::run({"stats", "--n", "1000"}, out, err);
  o.require(code == 0 && out.str().find("\"ternary_factors\": 166167000") != std::string::npos,
            "stats command");
  o.detail << " n=1000 -> " << big.variables << " vars / " << big.ternary_factors
           << " ternary; n=46 -> 1035 vars; n=4 -> 6 vars / 10 factors, degree 3";
  const double secs = seconds_since(start);
  o.require(secs < 1.0, "runtime < 1 s");
  report(1, "structural counts", o, secs);
  return o.pass;
}

// 2. Oracle equivalence.
bool criterion2(AuditLog& audit) {
  const auto start = Clock::now();
  Outcome o;
  std::mt19937_64 rng(2024);
  const auto eq = RelationshipKind::Equivalence;
  std::size_t total = 0, matched = 0, score_regressions = 0;
  for (std::size_t n : {3, 4, 5}) {
    for (int i = 0; i < 100; ++i) {
      const FactorGraph g = random_dense(rng, n, eq);
      const AssignmentGraph exact = exact_map_oracle(g);
      const AssignmentGraph lbp = lbp_map(g);
      audit.oracle(exact);
      audit.lbp(g, lbp);
      ++total;
      if (lbp.labels == exact.labels) {
        ++matched;
        if (joint_log_score(g, lbp.labels) < exact.log_score - 1e-9) ++score_regressions;
      }
    }
  }
  const double rate = static_cast<double>(matched) / static_cast<double>(total);
  o.require(rate >= 0.90, "dense match rate >= 90%");
  o.require(score_regressions == 0, "matching scores within 1e-9");

  std::size_t trees = 0, tree_matched = 0;
  std::bernoulli_distribution keep(0.5);
  while (trees < 500) {
    FactorGraph g;
    if (trees % 2 == 0) {
      g = random_dense(rng, 3, eq);
    } else {
      // Sparse pair subsets over 5 concepts with at most one triangle.
      std::vector<RelationshipVariable> vars;
      for (ConceptId a = 0; a < 5; ++a) {
        for (ConceptId b = a + 1; b < 5; ++b) {
          if (keep(rng)) vars.push_back({{a, b}, PriorBelief(beta_prior(rng))});
        }
      }
      if (vars.empty()) continue;
      g = FactorGraph::build(5, eq, std::move(vars),
                             TernaryPotential::from_theta(eq, random_theta(rng, eq)));
      if (g.ternary_count() > 1) continue;
    }
    const AssignmentGraph exact = exact_map_oracle(g);
    const AssignmentGraph lbp = lbp_map(g);
    audit.oracle(exact);
    audit.lbp(g, lbp);
    ++trees;
    tree_matched += lbp.labels == exact.labels;
  }
  o.require(tree_matched == trees, "tree instances 100%");
  o.detail << " dense " << matched << "/" << total << " = " << fmt(100.0 * rate, 1)
           << "% (need >= 90%); score regressions " << score_regressions << "; trees "
           << tree_matched << "/" << trees;
  const double secs = seconds_since(start);
  o.require(secs < 120.0, "runtime < 2 min");
  report(2, "oracle equivalence", o, secs);
  return o.pass;
}

// 3. Conflict resolution on the three-concept scenario.
bool criterion3(AuditLog& audit) {
  const auto start = Clock::now();
  Outcome o;
  const auto eq = RelationshipKind::Equivalence;
  PriorMap priors;
  priors[variable_index(0, 1, 3, eq)] = PriorBelief(0.6);
  priors[variable_index(1, 2, 3, eq)] = PriorBelief(0.6);
  priors[variable_index(0, 2, 3, eq)] = PriorBelief(0.1);
  const std::vector<double> theta{1.0, 0.3, 0.3, 0.3, 0.9};
  const FactorGraph g = build_factor_graph(vocabulary(3), priors, TernaryPotential::from_theta(eq, theta));
  const AssignmentGraph exact = exact_map_oracle(g);
  const AssignmentGraph lbp = lbp_map(g);
  const AssignmentGraph again = lbp_map(g);
  audit.oracle(exact);
  audit.lbp(g, lbp);
  std::size_t flips = 0;
  for (VariableId v = 0; v < g.variable_count(); ++v) flips += lbp.labels[v] != g.variable(v).prior.argmax();
  o.require(lbp.violations.empty(), "zero violations");
  o.require(lbp.labels == exact.labels, "matches oracle");
  o.require(again.labels == lbp.labels && again.log_score == lbp.log_score, "deterministic");
  o.require(flips == 1, "exactly one prior argmax flipped");
  std::string labels;
  for (auto l : lbp.labels) labels += std::to_string(l);
  o.detail << " labels (r01,r02,r12) = " << labels << ", oracle agrees: "
           << (lbp.labels == exact.labels ? "yes" : "no") << ", violations "
           << lbp.violations.size() << ", prior flips " << flips << " (criterion expects 1)";
  const double secs = seconds_since(start);
  o.require(secs < 1.0, "runtime < 1 s");
  report(3, "conflict resolution", o, secs);
  return o.pass;
}

// 4. Posterior uplift on the synthetic benchmark.
bool criterion4(AuditLog& audit) {
  const auto start = Clock::now();
  Outcome o;
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  double prior_sum = 0.0, post_sum = 0.0;
  const int seeds = 10;
  std::ostringstream per_seed;
  for (int seed = 0; seed < seeds; ++seed) {
    SyntheticConfig cfg;
    cfg.n_concepts = 60;
    cfg.n_clusters = 12;
    cfg.prior_noise = 0.15;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SyntheticDataset d = generate_synthetic(cfg);
    const FactorGraph g = build_factor_graph(d.concepts, d.prior_map(),
                                             TernaryPotential::default_for(d.kind));
    auto variables_of = [&](const std::vector<std::size_t>& split) {
      std::vector<VariableId> vars;
      std::vector<std::uint8_t> gold;
      for (std::size_t i : split) {
        vars.push_back(*g.find(d.pairs[i]));
        gold.push_back(d.gold[i]);
      }
      return std::make_pair(vars, gold);
    };
    auto [val_vars, val_gold] = variables_of(d.validation);
    auto [test_vars, test_gold] = variables_of(d.test);

    std::vector<std::uint8_t> prior_pred;
    for (VariableId v : test_vars) prior_pred.push_back(g.variable(v).prior.argmax());
    const double prior_f1 = prf1(prior_pred, test_gold).f1;

    const TuningProblem problem = TuningProblem::from_graph(g, val_vars, val_gold);
    const TuningResult tuned = tune(SearchSpace::default_for(d.kind), problem, 60,
                                    static_cast<std::uint64_t>(seed), workers);
    LbpConfig lbp;
    lbp.damping = tuned.best.config.damping;
    lbp.max_iterations = tuned.best.config.max_iterations;
    const FactorGraph tuned_graph =
        g.with_potential(TernaryPotential::from_theta(d.kind, tuned.best.config.theta));
    const AssignmentGraph post = lbp_map(tuned_graph, lbp);
    audit.lbp(tuned_graph, post);
    std::vector<std::uint8_t> post_pred;
    for (VariableId v : test_vars) post_pred.push_back(post.labels[v]);
    const double post_f1 = prf1(post_pred, test_gold).f1;
    prior_sum += prior_f1;
    post_sum += post_f1;
    per_seed << " " << fmt(prior_f1, 2) << "->" << fmt(post_f1, 2);
  }
  const double prior_mean = prior_sum / seeds, post_mean = post_sum / seeds;
  const double uplift = 100.0 * (post_mean - prior_mean);
  o.require(uplift >= 5.0, "uplift >= 5 F1 points");
  o.detail << " mean test F1 prior " << fmt(prior_mean) << " -> posterior " << fmt(post_mean)
           << " (+" << fmt(uplift, 1) << " points, need >= 5); per seed" << per_seed.str();
  const double secs = seconds_since(start);
  o.require(secs < 600.0, "runtime < 10 min");
  report(4, "posterior uplift", o, secs);
  return o.pass;
}

// 5. Transitivity audit across criteria 2-4.
bool criterion5(const AuditLog& audit) {
  const auto start = Clock::now();
  Outcome o;
  o.require(audit.oracle_violating == 0, "oracle outputs have 0 violations");

  std::vector<std::pair<FactorGraph, AssignmentGraph>> cases = audit.invalid;
  // One-iteration decodes add invalid starting points for the repair check.
  std::mt19937_64 rng(55);
  LbpConfig quick;
  quick.max_iterations = 1;
  for (int i = 0; i < 200; ++i) {
    const FactorGraph g = random_dense(rng, 3 + i % 4, RelationshipKind::Equivalence);
    const AssignmentGraph a = lbp_map(g, quick);
    if (!a.violations.empty()) cases.emplace_back(g, a);
  }
  std::size_t repaired_ok = 0;
  for (const auto& [g, a] : cases) {
    const AssignmentGraph r = repair_assignment(g, a, 0);
    const bool ok = r.violations.empty() && find_violations(g, r.labels).empty() &&
                    joint_log_score(g, r.labels) >= a.log_score;
    repaired_ok += ok;
  }
  o.require(repaired_ok == cases.size(), "repaired assignments valid and no worse");

  LbpConfig with_repair;
  with_repair.repair = true;
  std::size_t repaired_runs = 0, repaired_clean = 0;
  for (int i = 0; i < 100; ++i) {
    const FactorGraph g = random_dense(rng, 5 + i % 4, RelationshipKind::Equivalence);
    const AssignmentGraph a = lbp_map(g, with_repair);
    ++repaired_runs;
    repaired_clean += a.violations.empty();
  }
  o.require(repaired_clean == repaired_runs, "lbp with repair has 0 violations");
  o.detail << " oracle " << audit.oracle_violating << "/" << audit.oracle_runs
           << " violating; lbp " << audit.lbp_violating << "/" << audit.lbp_runs
           << " violating (" << audit.lbp_violations << " cliques); repair fixed "
           << repaired_ok << "/" << cases.size() << " invalid assignments; repair mode clean "
           << repaired_clean << "/" << repaired_runs;
  report(5, "transitivity audit", o, seconds_since(start));
  return o.pass;
}

// 6. Scalability.
bool criterion6() {
  const auto start = Clock::now();
  Outcome o;
  SyntheticConfig dense_cfg;
  dense_cfg.n_concepts = 60;
  dense_cfg.n_clusters = 12;
  dense_cfg.seed = 1;
  const SyntheticDataset dense = generate_synthetic(dense_cfg);
  const FactorGraph g = build_factor_graph(dense.concepts, dense.prior_map(),
                                           TernaryPotential::default_for(dense.kind));
  o.require(g.variable_count() >= 1500 && g.ternary_count() >= 20000, "dense graph size");
  LbpConfig single;
  single.threads = 1;
  const auto t_dense = Clock::now();
  LbpSolver solver(g, single);
  for (int i = 0; i < 200; ++i) solver.step();
  const AssignmentGraph decoded = solver.decode();
  const double dense_secs = seconds_since(t_dense);
  o.require(solver.iterations() == 200 && decoded.labels.size() == g.variable_count(),
            "200 iterations");
  o.require(dense_secs < 120.0, "dense run < 120 s");

  SyntheticConfig sparse_cfg;
  sparse_cfg.n_concepts = 2000;
  sparse_cfg.n_clusters = 400;
  sparse_cfg.candidate_negatives = 10;
  sparse_cfg.seed = 6;
  const SyntheticDataset sparse = generate_synthetic(sparse_cfg);
  const auto t_part = Clock::now();
  const EmbeddingSet emb = EmbeddingSet::char_trigram_tfidf(sparse.concepts);
  PartitionConfig pcfg;
  pcfg.k = 8;
  pcfg.workers = 8;
  const auto parts = build_partitions(sparse.pairs, sparse.prior_map(), sparse.concepts.size(),
                                      emb, TernaryPotential::default_for(sparse.kind), pcfg);
  const auto eight = infer_partitions_parallel(parts, sparse.pairs.size(), {}, 8);
  const double part_secs = seconds_since(t_part);
  const auto one = infer_partitions_parallel(parts, sparse.pairs.size(), {}, 1);
  o.require(part_secs < 300.0, "partitioned run < 5 min");
  o.require(one.merged.labels == eight.merged.labels, "1 vs 8 workers identical");
  std::size_t local_vars = 0, local_ternary = 0;
  for (const auto& r : eight.reports) local_vars += r.variables, local_ternary += r.ternary_factors;
  o.detail << " (a) " << g.variable_count() << " vars / " << g.ternary_count()
           << " ternary, 200 iterations in " << fmt(dense_secs, 2) << " s (limit 120);"
           << " (b) 2000 concepts, " << sparse.pairs.size() << " pairs, " << parts.size()
           << " partitions (" << local_vars << " local vars / " << local_ternary
           << " ternary), k=8, 8 workers in " << fmt(part_secs, 2) << " s (limit 300), "
           << "labels identical at 1 worker: " << (one.merged.labels == eight.merged.labels ? "yes" : "no")
           << "; hardware threads " << std::thread::hardware_concurrency();
  report(6, "scalability", o, seconds_since(start));
  return o.pass;
}

// 7. Invariance properties.
bool criterion7() {
  const auto start = Clock::now();
  Outcome o;
  constexpr int kCases = 200;
  std::mt19937_64 rng(77);
  std::map<std::string, int> passed;

  for (int i = 0; i < kCases; ++i) {
    const auto kind = i % 2 ? RelationshipKind::ParentChild : RelationshipKind::Equivalence;
    const FactorGraph g = random_dense(rng, 3 + i % 4, kind);
    const auto base = lbp_map(g).labels;
    passed["scale"] += lbp_map(g.with_scaled_ternary(0.1)).labels == base &&
                       lbp_map(g.with_scaled_ternary(10.0)).labels == base;
    LbpConfig threaded;
    threaded.threads = 4;
    const AssignmentGraph t = lbp_map(g, threaded);
    passed["workers"] += t.labels == base;
  }

  std::normal_distribution<double> z(0.0, 3.0);
  std::uniform_real_distribution<double> temp(1.0, 10.0);
  for (int i = 0; i < kCases; ++i) {
    LinearPriorModel m;
    for (double& w : m.weights) w = z(rng);
    m.bias = z(rng);
    FeatureVector x;
    x.qgram_similarity = std::abs(z(rng));
    x.token_jaccard = std::abs(z(rng));
    const auto raw = predict_prior(m, x).argmax();
    m.temperature = temp(rng);
    passed["temperature"] += predict_prior(m, x).argmax() == raw;
  }

  for (int i = 0; i < kCases; ++i) {
    SyntheticConfig cfg;
    cfg.n_concepts = 6;
    cfg.n_clusters = 2;
    cfg.prior_noise = 0.3;
    cfg.train_fraction = 0.2;
    cfg.validation_fraction = 0.6;
    cfg.seed = static_cast<std::uint64_t>(i);
    const SyntheticDataset d = generate_synthetic(cfg);
    const FactorGraph g = build_factor_graph(d.concepts, d.prior_map(),
                                             TernaryPotential::default_for(d.kind));
    std::vector<VariableId> vars;
    std::vector<std::uint8_t> gold;
    for (std::size_t k = 0; k < d.pairs.size(); ++k) {
      vars.push_back(*g.find(d.pairs[k]));
      gold.push_back(d.gold[k]);
    }
    const TuningProblem p = TuningProblem::from_graph(g, vars, gold);
    const auto space = SearchSpace::default_for(d.kind);
    const TuningResult a = tune(space, p, 4, static_cast<std::uint64_t>(i), 1);
    const TuningResult b = tune(space, p, 4, static_cast<std::uint64_t>(i), 3);
    bool same = a.history.size() == b.history.size();
    for (std::size_t t = 0; same && t < a.history.size(); ++t) {
      same = a.history[t].config == b.history[t].config &&
             a.history[t].objective == b.history[t].objective;
    }
    passed["tuning"] += same;
  }

  for (int i = 0; i < kCases; ++i) {
    const auto kind = i % 2 ? RelationshipKind::ParentChild : RelationshipKind::Equivalence;
    const std::size_t n = 4 + i % 6;
    std::vector<ConceptPair> pairs;
    std::bernoulli_distribution keep(0.35);
    for (ConceptId a = 0; a < n; ++a) {
      for (ConceptId b = 0; b < n; ++b) {
        if (a != b && canonical_pair({a, b}, kind) == ConceptPair{a, b} && keep(rng)) pairs.push_back({a, b});
      }
    }
    if (pairs.empty()) pairs.push_back({0, 1});
    std::vector<ConceptEmbedding> rows;
    std::normal_distribution<double> e(0.0, 1.0);
    for (std::size_t c = 0; c < n; ++c) rows.push_back({static_cast<ConceptId>(c), {e(rng), e(rng), e(rng)}});
    PartitionConfig pcfg;
    pcfg.k = 1 + i % 3;
    const auto parts = build_partitions(pairs, {}, n, EmbeddingSet::from_dense(n, rows),
                                        TernaryPotential::default_for(kind), pcfg);
    std::vector<int> owner(pairs.size(), 0);
    bool ok = true;
    for (const auto& part : parts) {
      for (std::size_t t = 0; t < part.test_pairs.size(); ++t) {
        ++owner[part.test_pairs[t]];
        ok = ok && part.local_graph.variable(part.test_variables[t]).pair == pairs[part.test_pairs[t]];
      }
    }
    ok = ok && std::all_of(owner.begin(), owner.end(), [](int c) { return c == 1; });
    passed["partition"] += ok;
  }

  std::uniform_int_distribution<int> len(1, 14), ch(0, 6);
  const char alphabet[] = "abc _-D";
  auto word = [&] {
    std::string s(static_cast<std::size_t>(len(rng)), 'a');
    for (char& c : s) c = alphabet[ch(rng)];
    return s;
  };
  for (int i = 0; i < kCases; ++i) {
    const Concept a{0, "x" + word(), {word(), word()}};
    const Concept b{1, "y" + word(), {word()}};
    const auto ab = extract_features(a, b).as_array();
    const auto ba = extract_features(b, a).as_array();
    passed["symmetry"] += ab == ba;
  }

  for (const auto& [name, count] : passed) {
    o.require(count == kCases, name);
    o.detail << " " << name << " " << count << "/" << kCases << ";";
  }
  const double secs = seconds_since(start);
  o.require(secs < 180.0, "runtime < 3 min");
  report(7, "invariance suite", o, secs);
  return o.pass;
}

}  // namespace

int main() {
  AuditLog audit;
  bool all = true;
  all = criterion1() && all;
  all = criterion2(audit) && all;
  all = criterion3(audit) && all;
  all = criterion4(audit) && all;
  all = criterion5(audit) && all;
  all = criterion6() && all;
  all = criterion7() && all;
  std::printf("acceptance: %s\n", all ? "all criteria passed" : "some criteria failed");
  return all ? 0 : 1;
}
