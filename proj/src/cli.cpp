#include "relgraph/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "relgraph/embedding.hpp"
#include "relgraph/errors.hpp"
#include "relgraph/eval.hpp"
#include "relgraph/graph.hpp"
#include "relgraph/inference.hpp"
#include "relgraph/io.hpp"
#include "relgraph/partition.hpp"
#include "relgraph/priors.hpp"
#include "relgraph/tuning.hpp"

namespace relgraph::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct RunConfig {
  RelationshipKind kind = RelationshipKind::Equivalence;
  std::string mode = "auto";
  std::size_t k = 8;
  std::size_t max_iterations = 200;
  double damping = 0.5;
  double tolerance = 1e-6;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool repair = false;
  std::optional<std::vector<double>> theta;
  double default_prior = kDefaultPrior;

  std::string resolved_mode() const {
    if (mode != "auto") return mode;
    return kind == RelationshipKind::Equivalence ? "dense" : "sparse";
  }

  TernaryPotential potential() const {
    return theta ? TernaryPotential::from_theta(kind, *theta) : TernaryPotential::default_for(kind);
  }

  LbpConfig lbp() const {
    LbpConfig c;
    c.max_iterations = max_iterations;
    c.damping = damping;
    c.tolerance = tolerance;
    c.seed = seed;
    c.threads = workers;
    c.repair = repair;
    c.validate();
    return c;
  }

  json to_json() const {
    return {{"relationship", to_string(kind)},
            {"mode", resolved_mode()},
            {"k", k},
            {"max_iterations", max_iterations},
            {"damping", damping},
            {"tolerance", tolerance},
            {"workers", workers},
            {"seed", seed},
            {"repair", repair},
            {"theta", potential().theta()},
            {"default_prior", default_prior}};
  }
};

// Flag values bound to CLI11; applied over the config file when given.
struct SharedFlags {
  std::string relationship;
  std::string mode;
  std::size_t k = 0;
  std::size_t max_iterations = 0;
  double damping = 0.0;
  double tolerance = 0.0;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  bool repair = false;
  std::vector<double> theta;
  double default_prior = 0.0;
  std::string config_path;

  std::map<std::string, CLI::Option*> options;
};

void add_shared_flags(CLI::App& cmd, SharedFlags& f) {
  f.options["relationship"] =
      cmd.add_option("--relationship", f.relationship, "equivalence or parent-child")
          ->check(CLI::IsMember({"equivalence", "parent-child"}));
  f.options["mode"] = cmd.add_option("--mode", f.mode, "auto, dense, sparse or partitioned")
                          ->check(CLI::IsMember({"auto", "dense", "sparse", "partitioned"}));
  f.options["k"] = cmd.add_option("--k", f.k, "neighbors per partition anchor");
  f.options["max_iterations"] = cmd.add_option("--max-iters", f.max_iterations, "LBP iterations");
  f.options["damping"] = cmd.add_option("--damping", f.damping, "message damping in [0, 1)");
  f.options["tolerance"] = cmd.add_option("--tolerance", f.tolerance, "convergence tolerance");
  f.options["workers"] = cmd.add_option("--workers", f.workers, "worker threads");
  f.options["seed"] = cmd.add_option("--seed", f.seed, "random seed");
  f.options["repair"] = cmd.add_flag("--repair", f.repair, "repair transitivity violations");
  f.options["theta"] = cmd.add_option("--theta", f.theta, "ternary potential parameters")
                           ->delimiter(',');
  f.options["default_prior"] =
      cmd.add_option("--default-prior", f.default_prior, "p_one for pairs without a prior");
  cmd.add_option("--config", f.config_path, "JSON config; flags take precedence");
}

void apply_config_json(RunConfig& cfg, const json& j) {
  // A tuning report is accepted directly: its best trial supplies the
  // potential and LBP settings.
  if (j.contains("best") && j["best"].contains("config")) {
    if (j.contains("config")) apply_config_json(cfg, j["config"]);
    apply_config_json(cfg, j["best"]["config"]);
    return;
  }
  if (j.contains("relationship")) {
    cfg.kind = parse_relationship_kind(j["relationship"].get<std::string>());
  }
  if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
  if (j.contains("k")) cfg.k = j["k"].get<std::size_t>();
  if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<std::size_t>();
  if (j.contains("damping")) cfg.damping = j["damping"].get<double>();
  if (j.contains("tolerance")) cfg.tolerance = j["tolerance"].get<double>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("repair")) cfg.repair = j["repair"].get<bool>();
  if (j.contains("theta")) cfg.theta = j["theta"].get<std::vector<double>>();
  if (j.contains("default_prior")) cfg.default_prior = j["default_prior"].get<double>();
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string(), 0, std::string("invalid JSON: ") + e.what());
  }
}

RunConfig resolve(const SharedFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) {
    const json j = read_json(f.config_path);
    try {
      apply_config_json(cfg, j);
    } catch (const json::exception& e) {
      throw InputError(f.config_path, 0, std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw InputError(f.config_path, 0, e.what());
    }
  }
  auto given = [&](const char* name) { return f.options.at(name)->count() > 0; };
  if (given("relationship")) cfg.kind = parse_relationship_kind(f.relationship);
  if (given("mode")) cfg.mode = f.mode;
  if (given("k")) cfg.k = f.k;
  if (given("max_iterations")) cfg.max_iterations = f.max_iterations;
  if (given("damping")) cfg.damping = f.damping;
  if (given("tolerance")) cfg.tolerance = f.tolerance;
  if (given("workers")) cfg.workers = f.workers;
  if (given("seed")) cfg.seed = f.seed;
  if (given("repair")) cfg.repair = f.repair;
  if (given("theta")) cfg.theta = f.theta;
  if (given("default_prior")) cfg.default_prior = f.default_prior;

  if (cfg.mode != "auto" && cfg.mode != "dense" && cfg.mode != "sparse" &&
      cfg.mode != "partitioned") {
    throw ConfigError("unknown mode '" + cfg.mode + "'");
  }
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.k < 1) throw ConfigError("k must be at least 1");
  if (!(cfg.default_prior >= 0.0 && cfg.default_prior <= 1.0)) {
    throw ConfigError("default prior must lie in [0, 1]");
  }
  cfg.potential();  // validates theta
  cfg.lbp();
  return cfg;
}

void emit(const json& report, const std::string& output, std::ostream& out) {
  if (output.empty() || output == "-") {
    out << report.dump(2) << "\n";
  } else {
    write_text(output, report.dump(2) + "\n");
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json metrics_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn},
          {"tn", m.tn},               {"zero_division", m.zero_division}};
}

json trial_json(const TrialConfig& c) {
  return {{"theta", c.theta}, {"damping", c.damping}, {"max_iterations", c.max_iterations}};
}

std::vector<ConceptPair> prior_pairs(const PriorMap& priors, std::size_t n, RelationshipKind kind) {
  std::vector<ConceptPair> pairs;
  pairs.reserve(priors.size());
  for (const auto& [index, belief] : priors) pairs.push_back(pair_from_index(index, n, kind));
  return pairs;
}

FactorGraph build_graph(const RunConfig& cfg, std::span<const Concept> concepts,
                        const PriorMap& priors, const TernaryPotential& potential) {
  GraphOptions options;
  options.default_p_one = cfg.default_prior;
  if (cfg.resolved_mode() == "sparse") {
    options.mode = GraphMode::Sparse;
    if (priors.empty()) throw ConfigError("sparse mode needs at least one prior pair");
  }
  return build_factor_graph(concepts, priors, potential, options);
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string concepts, priors, embeddings, output;
  bool oracle = false;
};

int cmd_infer(const InferArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Concept> concepts = read_concepts(a.concepts);
  const PriorMap priors = load_external_priors(a.priors, concepts, cfg.kind);
  const TernaryPotential potential = cfg.potential();
  const LbpConfig lbp = cfg.lbp();
  const std::string mode = cfg.resolved_mode();
  const std::size_t n = concepts.size();

  json config = cfg.to_json();
  config["oracle"] = a.oracle;
  config["concepts"] = a.concepts;
  config["priors"] = a.priors;
  json summary;
  json assignments = json::array();
  auto prior_of = [&](ConceptPair p) {
    auto it = priors.find(variable_index(p.left, p.right, n, cfg.kind));
    return it == priors.end() ? cfg.default_prior : it->second.p_one();
  };
  auto add_row = [&](ConceptPair p, std::uint8_t label, std::optional<double> margin) {
    json row{{"left", p.left}, {"right", p.right}, {"prior_p", prior_of(p)}, {"label", label}};
    row["margin"] = margin ? json(*margin) : json(nullptr);
    assignments.push_back(std::move(row));
  };

  if (mode == "partitioned") {
    if (a.oracle) throw ConfigError("--oracle is not available in partitioned mode");
    if (priors.empty()) throw ConfigError("partitioned mode needs at least one prior pair");
    std::optional<EmbeddingSet> external;
    if (!a.embeddings.empty()) external = read_embeddings(a.embeddings, n);
    const EmbeddingSet embeddings = EmbeddingSet::for_concepts(concepts, external);
    const std::vector<ConceptPair> pairs = prior_pairs(priors, n, cfg.kind);
    PartitionConfig pc;
    pc.k = cfg.k;
    pc.workers = cfg.workers;
    pc.seed = cfg.seed;
    pc.default_p_one = cfg.default_prior;
    err << "building " << pairs.size() << " pairs into partitions (k = " << pc.k << ")\n";
    const std::vector<Partition> parts =
        build_partitions(pairs, priors, n, embeddings, potential, pc);
    LbpConfig local = lbp;
    local.threads = 1;
    const PartitionedAssignment result =
        infer_partitions_parallel(parts, pairs.size(), local, cfg.workers);
    std::size_t variables = 0, ternary = 0;
    for (const auto& r : result.reports) {
      variables += r.variables;
      ternary += r.ternary_factors;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      add_row(pairs[i], result.merged.labels[i], result.merged.margins[i]);
    }
    summary = {{"partitions", parts.size()},
               {"variables", variables},
               {"unary_factors", variables},
               {"ternary_factors", ternary},
               {"iterations", result.merged.iterations},
               {"converged", result.merged.converged},
               {"violations", result.merged.violations.size()},
               {"violations_before_repair", result.merged.violations_before_repair},
               {"repair_flips", result.merged.repair_flips},
               {"log_score", result.merged.log_score}};
  } else {
    const FactorGraph graph = build_graph(cfg, concepts, priors, potential);
    err << "graph: " << graph.variable_count() << " variables, " << graph.ternary_count()
        << " ternary factors\n";
    AssignmentGraph result;
    if (a.oracle) {
      result = exact_map_oracle(graph);
    } else {
      result = lbp_map(graph, lbp);
    }
    for (std::size_t v = 0; v < graph.variable_count(); ++v) {
      const auto id = static_cast<VariableId>(v);
      add_row(graph.variable(id).pair, result.labels[v],
              result.margins.empty() ? std::nullopt : std::optional<double>(result.margins[v]));
    }
    summary = {{"variables", graph.variable_count()},
               {"unary_factors", graph.variable_count()},
               {"ternary_factors", graph.ternary_count()},
               {"iterations", result.iterations},
               {"converged", result.converged},
               {"violations", result.violations.size()},
               {"violations_before_repair", result.violations_before_repair},
               {"repair_flips", result.repair_flips},
               {"log_score", result.log_score}};
  }
  summary["wall_seconds"] = seconds_since(start);
  json report{{"command", "infer"},
              {"config", config},
              {"summary", summary},
              {"assignments", assignments}};
  emit(report, a.output, out);
  err << "done in " << summary["wall_seconds"].get<double>() << " s\n";
  return kExitOk;
}

// ----------------------------------------------------------------- tune

struct TuneArgs {
  std::string concepts, priors, labels, output;
  std::size_t budget = 60;
};

int cmd_tune(const TuneArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.resolved_mode() == "partitioned") {
    throw ConfigError("tune supports dense and sparse modes");
  }
  const std::vector<Concept> concepts = read_concepts(a.concepts);
  const PriorMap priors = load_external_priors(a.priors, concepts, cfg.kind);
  const std::vector<LabeledPair> labels = read_labels(a.labels, concepts.size(), cfg.kind);
  const FactorGraph graph = build_graph(cfg, concepts, priors, cfg.potential());

  std::vector<VariableId> eval;
  std::vector<std::uint8_t> gold;
  for (const LabeledPair& l : labels) {
    const auto v = graph.find(l.pair);
    if (!v) {
      throw InputError(a.labels, 0,
                       "pair (" + std::to_string(l.pair.left) + ", " +
                           std::to_string(l.pair.right) + ") is not a graph variable");
    }
    eval.push_back(*v);
    gold.push_back(l.label);
  }
  TuningProblem problem = TuningProblem::from_graph(graph, std::move(eval), std::move(gold));
  problem.lbp = cfg.lbp();
  problem.lbp.threads = 1;
  const SearchSpace space = SearchSpace::default_for(cfg.kind);
  err << "tuning: budget " << a.budget << ", " << problem.eval_variables.size()
      << " validation pairs\n";
  const TuningResult result = tune(space, problem, a.budget, cfg.seed, cfg.workers);

  json history = json::array();
  for (const TrialRecord& r : result.history) {
    history.push_back({{"trial", r.trial},
                       {"config", trial_json(r.config)},
                       {"f1", r.objective},
                       {"seconds", r.wall_seconds}});
  }
  json ranges = json::array();
  for (const Range& r : space.theta_ranges) ranges.push_back({r.lower, r.upper});
  json config = cfg.to_json();
  config["budget"] = a.budget;
  config["concepts"] = a.concepts;
  config["priors"] = a.priors;
  config["labels"] = a.labels;
  json report{{"command", "tune"},
              {"config", config},
              {"space",
               {{"theta_ranges", ranges},
                {"damping", {space.damping.lower, space.damping.upper}},
                {"iteration_choices", space.iteration_choices}}},
              {"history", history},
              {"best",
               {{"trial", result.best.trial},
                {"config", trial_json(result.best.config)},
                {"f1", result.best.objective},
                {"seconds", result.best.wall_seconds}}}};
  emit(report, a.output, out);
  err << "best trial " << result.best.trial << ": F1 " << result.best.objective << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string gold, predictions, output, concepts;
};

// Predicted labels keyed by canonical pair. Accepts an infer report (JSON),
// a labels CSV, or a priors CSV (thresholded at prior argmax).
std::map<ConceptPair, std::uint8_t> read_predictions(const fs::path& path, std::size_t n,
                                                     RelationshipKind kind) {
  std::map<ConceptPair, std::uint8_t> out;
  if (path.extension() == ".json") {
    const json j = read_json(path);
    if (!j.contains("assignments") || !j["assignments"].is_array()) {
      throw InputError(path.string(), 0, "no assignments array");
    }
    for (const auto& row : j["assignments"]) {
      try {
        const ConceptPair p = canonical_pair(
            {row.at("left").get<ConceptId>(), row.at("right").get<ConceptId>()}, kind);
        if (p.left >= n || p.right >= n) {
          throw InputError(path.string(), 0, "assignment references an unknown concept");
        }
        out[p] = row.at("label").get<int>() != 0 ? 1 : 0;
      } catch (const json::exception& e) {
        throw InputError(path.string(), 0, std::string("bad assignment row: ") + e.what());
      }
    }
    return out;
  }
  const CsvTable table = read_csv(path);
  if (table.header.size() >= 3 && table.header[2] == "p_one") {
    std::vector<Concept> vocab(n);
    for (std::size_t i = 0; i < n; ++i) vocab[i].id = static_cast<ConceptId>(i);
    for (const auto& [index, belief] : load_external_priors(path, vocab, kind)) {
      out[pair_from_index(index, n, kind)] = belief.argmax();
    }
    return out;
  }
  for (const LabeledPair& l : read_labels(path, n, kind)) out[l.pair] = l.label;
  return out;
}

int cmd_eval(const EvalArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::vector<Concept> concepts = read_concepts(a.concepts);
  const std::size_t n = concepts.size();
  const std::vector<LabeledPair> gold_rows = read_labels(a.gold, n, cfg.kind);
  const auto predicted_all = read_predictions(a.predictions, n, cfg.kind);

  std::map<ConceptPair, std::uint8_t> gold, predicted;
  for (const LabeledPair& l : gold_rows) {
    auto it = predicted_all.find(l.pair);
    if (it == predicted_all.end()) {
      throw InputError(a.predictions, 0,
                       "no prediction for gold pair (" + std::to_string(l.pair.left) + ", " +
                           std::to_string(l.pair.right) + ")");
    }
    gold[l.pair] = l.label;
    predicted[l.pair] = it->second;
  }
  const Metrics m = prf1(predicted, gold);
  json config = cfg.to_json();
  config["gold"] = a.gold;
  config["predictions"] = a.predictions;
  json report{{"command", "eval"}, {"config", config}, {"pairs", gold.size()},
              {"metrics", metrics_json(m)}};
  emit(report, a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string output_dir;
  std::size_t concepts = 60;
  std::size_t clusters = 12;
  double noise = 0.15;
  std::size_t negatives = 0;
};

int cmd_synth(const SynthArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SyntheticConfig sc;
  sc.kind = cfg.kind;
  sc.n_concepts = a.concepts;
  sc.n_clusters = a.clusters;
  sc.prior_noise = a.noise;
  sc.candidate_negatives = a.negatives;
  sc.seed = cfg.seed;
  const SyntheticDataset ds = generate_synthetic(sc);
  const fs::path dir = a.output_dir;
  write_concepts(dir / "concepts.csv", ds.concepts);
  const auto priors = ds.prior_rows();
  write_priors(dir / "priors.csv", priors);
  const auto all = ds.all_labels();
  write_labels(dir / "labels.csv", all);
  const auto train = ds.labels(ds.train);
  const auto validation = ds.labels(ds.validation);
  const auto test = ds.labels(ds.test);
  write_labels(dir / "train_labels.csv", train);
  write_labels(dir / "validation_labels.csv", validation);
  write_labels(dir / "test_labels.csv", test);

  auto split_metrics = [&](std::span<const std::size_t> split) {
    std::vector<std::uint8_t> p, g;
    for (std::size_t i : split) {
      p.push_back(ds.prior[i] > 0.5 ? 1 : 0);
      g.push_back(ds.gold[i]);
    }
    return metrics_json(prf1(p, g));
  };
  const auto positives = std::count(ds.gold.begin(), ds.gold.end(), 1);
  json config = cfg.to_json();
  config["concepts"] = a.concepts;
  config["clusters"] = a.clusters;
  config["noise"] = a.noise;
  config["negatives"] = a.negatives;
  config["output_dir"] = a.output_dir;
  json report{{"command", "synth"},
              {"config", config},
              {"pairs", ds.pairs.size()},
              {"positives", positives},
              {"splits",
               {{"train", ds.train.size()},
                {"validation", ds.validation.size()},
                {"test", ds.test.size()}}},
              {"prior_metrics",
               {{"train", split_metrics(ds.train)},
                {"validation", split_metrics(ds.validation)},
                {"test", split_metrics(ds.test)}}}};
  out << report.dump(2) << "\n";
  err << "wrote " << ds.pairs.size() << " pairs to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------- train-prior

struct TrainArgs {
  std::string concepts, train, validation, embeddings, output, priors_out, candidates;
  std::size_t epochs = 2000;
  double learning_rate = 0.5;
};

std::vector<LabeledFeatures> featurize(std::span<const LabeledPair> labels,
                                       std::span<const Concept> concepts,
                                       const EmbeddingSet* embeddings) {
  std::vector<LabeledFeatures> out;
  out.reserve(labels.size());
  for (const LabeledPair& l : labels) {
    out.push_back({extract_features(concepts[l.pair.left], concepts[l.pair.right], embeddings),
                   l.label});
  }
  return out;
}

int cmd_train_prior(const TrainArgs& a, const RunConfig& cfg, std::ostream& out,
                    std::ostream& err) {
  const std::vector<Concept> concepts = read_concepts(a.concepts);
  const std::size_t n = concepts.size();
  std::optional<EmbeddingSet> embeddings;
  if (!a.embeddings.empty()) embeddings = read_embeddings(a.embeddings, n);
  const EmbeddingSet* emb = embeddings ? &*embeddings : nullptr;

  const auto train_rows = read_labels(a.train, n, cfg.kind);
  const auto train = featurize(train_rows, concepts, emb);
  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.learning_rate = a.learning_rate;
  tc.seed = cfg.seed;
  TrainTrace trace;
  err << "training on " << train.size() << " pairs\n";
  LinearPriorModel model = train_linear_prior(train, tc, &trace);

  json validation_block = nullptr;
  if (!a.validation.empty()) {
    const auto val_rows = read_labels(a.validation, n, cfg.kind);
    const auto val = featurize(val_rows, concepts, emb);
    std::vector<double> grid;
    for (double t = 0.25; t <= 4.0 + 1e-9; t += 0.25) grid.push_back(t);
    model = calibrate_temperature(model, val, grid);
    std::vector<std::uint8_t> p, g;
    for (const auto& x : val) {
      p.push_back(predict_prior(model, x.features).argmax());
      g.push_back(x.label);
    }
    validation_block = {{"pairs", val.size()},
                        {"metrics", metrics_json(prf1(p, g))},
                        {"nll", negative_log_likelihood(model, val)}};
  }

  if (!a.priors_out.empty()) {
    std::vector<ConceptPair> pairs;
    if (!a.candidates.empty()) {
      const CsvTable table = read_csv(a.candidates);
      for (const CsvRow& row : table.rows) {
        if (row.fields.size() < 2) throw InputError(a.candidates, row.line, "expected left_id,right_id");
        const auto l = parse_integer(row.fields[0], a.candidates, row.line);
        const auto r = parse_integer(row.fields[1], a.candidates, row.line);
        if (l < 0 || r < 0 || static_cast<std::size_t>(l) >= n ||
            static_cast<std::size_t>(r) >= n || l == r) {
          throw InputError(a.candidates, row.line, "invalid concept pair");
        }
        pairs.push_back(canonical_pair(
            {static_cast<ConceptId>(l), static_cast<ConceptId>(r)}, cfg.kind));
      }
    } else {
      for (std::size_t i = 0; i < dense_variable_count(n, cfg.kind); ++i) {
        pairs.push_back(pair_from_index(i, n, cfg.kind));
      }
    }
    std::vector<std::pair<ConceptPair, double>> rows;
    rows.reserve(pairs.size());
    for (ConceptPair p : pairs) {
      rows.emplace_back(
          p, predict_prior(model, extract_features(concepts[p.left], concepts[p.right], emb))
                 .p_one());
    }
    write_priors(a.priors_out, rows);
    err << "wrote " << rows.size() << " priors to " << a.priors_out << "\n";
  }

  json weights = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    weights[std::string(kFeatureNames[i])] = model.weights[i];
  }
  json config = cfg.to_json();
  config["epochs"] = a.epochs;
  config["learning_rate"] = a.learning_rate;
  config["train"] = a.train;
  config["validation"] = a.validation;
  json report{{"command", "train-prior"},
              {"config", config},
              {"model",
               {{"weights", weights}, {"bias", model.bias}, {"temperature", model.temperature}}},
              {"train",
               {{"pairs", train.size()},
                {"final_loss", trace.loss.empty() ? 0.0 : trace.loss.back()}}},
              {"validation", validation_block}};
  emit(report, a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::size_t n = 0;
  std::string concepts;
  bool materialize = false;
};

int cmd_stats(const StatsArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream&) {
  std::size_t n = a.n;
  if (!a.concepts.empty()) n = read_concepts(a.concepts).size();
  if (n < 2) throw ConfigError("stats needs at least 2 concepts (--n or --concepts)");
  const GraphStats s = count_graph_stats(n, cfg.kind);
  json config = cfg.to_json();
  config["n"] = n;
  json report{{"command", "stats"},
              {"config", config},
              {"variables", s.variables},
              {"unary_factors", s.variables},
              {"ternary_factors", s.ternary_factors},
              {"factors", s.factors()},
              {"edges", s.edges},
              {"messages_per_iteration", messages_per_iteration(s.variables, s.ternary_factors)}};
  if (a.materialize) {
    std::vector<Concept> concepts(n);
    for (std::size_t i = 0; i < n; ++i) {
      concepts[i].id = static_cast<ConceptId>(i);
      concepts[i].name = "c" + std::to_string(i);
    }
    const FactorGraph g = build_factor_graph(concepts, {}, cfg.potential());
    std::map<std::size_t, std::size_t> degrees;
    for (std::size_t v = 0; v < g.variable_count(); ++v) {
      ++degrees[g.degree(static_cast<VariableId>(v))];
    }
    json histogram = json::object();
    for (const auto& [d, count] : degrees) histogram[std::to_string(d)] = count;
    report["materialized"] = {{"variables", g.variable_count()},
                              {"factors", g.factor_count()},
                              {"ternary_factors", g.ternary_count()},
                              {"degree_histogram", histogram}};
  }
  out << report.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relationship graph inference with loopy belief propagation", "relgraph"};
  app.require_subcommand(1);

  SharedFlags f_infer, f_tune, f_eval, f_synth, f_train, f_stats;
  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "decode the MAP relationship graph");
  infer->add_option("--concepts", infer_args.concepts, "concepts CSV")->required();
  infer->add_option("--priors", infer_args.priors, "priors CSV")->required();
  infer->add_option("--embeddings", infer_args.embeddings, "embeddings CSV (partitioned mode)");
  infer->add_option("-o,--output", infer_args.output, "assignment JSON (default stdout)");
  infer->add_flag("--oracle", infer_args.oracle, "exact enumeration (at most 25 variables)");
  add_shared_flags(*infer, f_infer);

  TuneArgs tune_args;
  auto* tune_cmd = app.add_subcommand("tune", "search potential and LBP parameters");
  tune_cmd->add_option("--concepts", tune_args.concepts, "concepts CSV")->required();
  tune_cmd->add_option("--priors", tune_args.priors, "priors CSV")->required();
  tune_cmd->add_option("--labels", tune_args.labels, "validation labels CSV")->required();
  tune_cmd->add_option("--budget", tune_args.budget, "number of trials")->capture_default_str();
  tune_cmd->add_option("-o,--output", tune_args.output, "tuning report JSON");
  add_shared_flags(*tune_cmd, f_tune);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "precision, recall and F1 against gold labels");
  eval->add_option("--concepts", eval_args.concepts, "concepts CSV")->required();
  eval->add_option("--gold", eval_args.gold, "gold labels CSV")->required();
  eval->add_option("--predictions", eval_args.predictions,
                   "infer JSON, labels CSV or priors CSV")
      ->required();
  eval->add_option("-o,--output", eval_args.output, "metrics JSON");
  add_shared_flags(*eval, f_eval);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write a synthetic benchmark");
  synth->add_option("--output-dir", synth_args.output_dir, "directory for CSV files")->required();
  synth->add_option("--concepts", synth_args.concepts, "concept count")->capture_default_str();
  synth->add_option("--clusters", synth_args.clusters, "clusters (or tree roots)")
      ->capture_default_str();
  synth->add_option("--noise", synth_args.noise, "prior flip probability")->capture_default_str();
  synth->add_option("--negatives", synth_args.negatives,
                    "random negative partners per concept (0 = all pairs)")
      ->capture_default_str();
  add_shared_flags(*synth, f_synth);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train-prior", "fit the feature-based prior model");
  train->add_option("--concepts", train_args.concepts, "concepts CSV")->required();
  train->add_option("--train", train_args.train, "training labels CSV")->required();
  train->add_option("--validation", train_args.validation, "validation labels CSV");
  train->add_option("--embeddings", train_args.embeddings, "embeddings CSV");
  train->add_option("--epochs", train_args.epochs, "gradient steps")->capture_default_str();
  train->add_option("--learning-rate", train_args.learning_rate, "step size")
      ->capture_default_str();
  train->add_option("--priors-out", train_args.priors_out, "write predicted priors CSV");
  train->add_option("--candidates", train_args.candidates,
                    "CSV whose first two columns list the pairs to score");
  train->add_option("-o,--output", train_args.output, "model JSON");
  add_shared_flags(*train, f_train);

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "closed-form dense graph counts");
  stats->add_option("--n", stats_args.n, "concept count");
  stats->add_option("--concepts", stats_args.concepts, "concepts CSV (count taken from it)");
  stats->add_flag("--materialize", stats_args.materialize, "build the graph and report degrees");
  add_shared_flags(*stats, f_stats);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (infer->parsed()) return cmd_infer(infer_args, resolve(f_infer), out, err);
    if (tune_cmd->parsed()) return cmd_tune(tune_args, resolve(f_tune), out, err);
    if (eval->parsed()) return cmd_eval(eval_args, resolve(f_eval), out, err);
    if (synth->parsed()) return cmd_synth(synth_args, resolve(f_synth), out, err);
    if (train->parsed()) return cmd_train_prior(train_args, resolve(f_train), out, err);
    if (stats->parsed()) return cmd_stats(stats_args, resolve(f_stats), out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace relgraph::cli
