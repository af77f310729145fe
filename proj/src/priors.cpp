#include "relgraph/priors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "relgraph/errors.hpp"
#include "relgraph/io.hpp"

namespace relgraph {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename Set>
double jaccard(const Set& a, const Set& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double min_max_ratio(std::size_t a, std::size_t b) {
  a = std::max<std::size_t>(a, 1);
  b = std::max<std::size_t>(b, 1);
  return static_cast<double>(std::min(a, b)) / static_cast<double>(std::max(a, b));
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

std::array<double, kFeatureCount> FeatureVector::as_array() const {
  return {qgram_similarity, token_jaccard,         edit_similarity,
          word_count_ratio, char_count_ratio,      value_jaccard.value_or(0.0),
          embedding_cosine.value_or(0.0)};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    // Bytes >= 0x80 belong to multi-byte UTF-8 characters and stay in tokens.
    if (c >= 0x80 || std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double qgram_jaccard(std::string_view a, std::string_view b, std::size_t q) {
  auto grams = [q](std::string_view s) {
    const std::string lower = lowercase(s);
    std::set<std::string> out;
    if (lower.size() < q) {
      out.insert(lower);
      return out;
    }
    for (std::size_t i = 0; i + q <= lower.size(); ++i) out.insert(lower.substr(i, q));
    return out;
  };
  return jaccard(grams(a), grams(b));
}

FeatureVector extract_features(const Concept& a, const Concept& b,
                               const EmbeddingSet* embeddings) {
  FeatureVector f;
  const std::string na = lowercase(a.name);
  const std::string nb = lowercase(b.name);
  f.qgram_similarity = qgram_jaccard(na, nb);

  const auto ta = tokenize(a.name);
  const auto tb = tokenize(b.name);
  f.token_jaccard = jaccard(std::set<std::string>(ta.begin(), ta.end()),
                            std::set<std::string>(tb.begin(), tb.end()));

  const std::size_t longest = std::max(na.size(), nb.size());
  f.edit_similarity =
      longest == 0 ? 1.0
                   : 1.0 - static_cast<double>(levenshtein(na, nb)) / static_cast<double>(longest);
  f.word_count_ratio = min_max_ratio(ta.size(), tb.size());
  f.char_count_ratio = min_max_ratio(na.size(), nb.size());

  if (!a.values.empty() && !b.values.empty()) {
    std::set<std::string> va, vb;
    for (const auto& v : a.values) va.insert(lowercase(v));
    for (const auto& v : b.values) vb.insert(lowercase(v));
    f.value_jaccard = jaccard(va, vb);
  }
  if (embeddings != nullptr && embeddings->has(a.id) && embeddings->has(b.id)) {
    f.embedding_cosine = std::clamp(embeddings->cosine(a.id, b.id), -1.0, 1.0);
  }
  return f;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LinearPriorModel::logit(const FeatureVector& x) const {
  const auto v = x.as_array();
  double z = bias;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z += weights[i] * v[i];
  return z;
}

double LinearPriorModel::probability(const FeatureVector& x) const {
  return sigmoid(logit(x) / temperature);
}

LinearPriorModel train_linear_prior(std::span<const LabeledFeatures> examples,
                                    const TrainConfig& config, TrainTrace* trace) {
  std::size_t positives = 0;
  for (const auto& e : examples) {
    if (e.label > 1) throw ConfigError("training labels must be 0 or 1");
    positives += e.label;
  }
  const std::size_t n = examples.size();
  if (positives == 0 || positives == n) {
    throw ConfigError("training set needs at least one example of each class");
  }
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");

  const double nn = static_cast<double>(n);
  const double w_pos = config.class_weighting ? nn / (2.0 * static_cast<double>(positives)) : 1.0;
  const double w_neg =
      config.class_weighting ? nn / (2.0 * static_cast<double>(n - positives)) : 1.0;

  std::vector<std::array<double, kFeatureCount>> xs;
  xs.reserve(n);
  for (const auto& e : examples) {
    xs.push_back(e.features.as_array());
    for (double v : xs.back()) {
      if (!std::isfinite(v)) throw ConfigError("non-finite feature value");
    }
  }

  LinearPriorModel model;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (double& w : model.weights) w = init(rng);

  std::array<double, kFeatureCount> grad{};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    grad.fill(0.0);
    double grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = model.bias;
      for (std::size_t d = 0; d < kFeatureCount; ++d) z += model.weights[d] * xs[i][d];
      const bool pos = examples[i].label == 1;
      const double w = pos ? w_pos : w_neg;
      loss += w * (pos ? softplus(-z) : softplus(z));
      const double r = w * (sigmoid(z) - (pos ? 1.0 : 0.0));
      for (std::size_t d = 0; d < kFeatureCount; ++d) grad[d] += r * xs[i][d];
      grad_b += r;
    }
    if (trace != nullptr) trace->loss.push_back(loss / nn);
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
      model.weights[d] -= config.learning_rate * grad[d] / nn;
    }
    model.bias -= config.learning_rate * grad_b / nn;
  }
  return model;
}

PriorBelief predict_prior(const LinearPriorModel& model, const FeatureVector& features) {
  return PriorBelief(model.probability(features));
}

double negative_log_likelihood(const LinearPriorModel& model,
                               std::span<const LabeledFeatures> examples) {
  if (examples.empty()) throw ConfigError("empty example set");
  double total = 0.0;
  for (const auto& e : examples) {
    const double z = model.logit(e.features) / model.temperature;
    total += e.label == 1 ? softplus(-z) : softplus(z);
  }
  return total / static_cast<double>(examples.size());
}

LinearPriorModel calibrate_temperature(LinearPriorModel model,
                                       std::span<const LabeledFeatures> validation,
                                       std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("temperature grid is empty");
  if (validation.empty()) throw ConfigError("validation set is empty");
  double best_nll = 0.0;
  double best_t = 0.0;
  for (double t : grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("temperatures must be positive");
    model.temperature = t;
    const double nll = negative_log_likelihood(model, validation);
    if (best_t == 0.0 || nll < best_nll) {
      best_nll = nll;
      best_t = t;
    }
  }
  model.temperature = best_t;
  return model;
}

PriorMap load_external_priors(const std::filesystem::path& path,
                              std::span<const Concept> vocabulary, RelationshipKind kind) {
  const CsvTable table = read_csv(path);
  static constexpr std::string_view kHeader[] = {"left_id", "right_id", "p_one"};
  expect_header(table, path, kHeader);
  const std::size_t n = vocabulary.size();
  PriorMap out;
  for (const auto& row : table.rows) {
    if (row.fields.size() != 3) throw InputError(path.string(), row.line, "expected 3 fields");
    const long long left = parse_integer(row.fields[0], path, row.line);
    const long long right = parse_integer(row.fields[1], path, row.line);
    for (long long id : {left, right}) {
      if (id < 0 || static_cast<unsigned long long>(id) >= n) {
        throw InputError(path.string(), row.line, "unknown concept id " + std::to_string(id));
      }
    }
    if (left == right) throw InputError(path.string(), row.line, "self pair");
    const double p = parse_real(row.fields[2], path, row.line);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError(path.string(), row.line, "probability outside [0, 1]");
    }
    const std::size_t index = variable_index(static_cast<ConceptId>(left),
                                             static_cast<ConceptId>(right), n, kind);
    if (!out.emplace(index, PriorBelief(p)).second) {
      throw InputError(path.string(), row.line, "duplicate pair");
    }
  }
  return out;
}

}  // namespace relgraph
