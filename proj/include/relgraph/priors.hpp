#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relgraph/embedding.hpp"
#include "relgraph/graph.hpp"
#include "relgraph/model.hpp"

namespace relgraph {

inline constexpr std::size_t kFeatureCount = 7;
inline constexpr std::size_t kQgramSize = 3;

// Fixed feature order used by LinearPriorModel::weights.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "qgram_similarity", "token_jaccard",  "edit_similarity", "word_count_ratio",
    "char_count_ratio", "value_jaccard", "embedding_cosine",
};

struct FeatureVector {
  double qgram_similarity = 0.0;
  double token_jaccard = 0.0;
  double edit_similarity = 0.0;
  double word_count_ratio = 1.0;
  double char_count_ratio = 1.0;
  std::optional<double> value_jaccard;
  std::optional<double> embedding_cosine;

  // Absent optional features are imputed as 0.
  std::array<double, kFeatureCount> as_array() const;
};

// Lowercased tokens split on whitespace and ASCII punctuation.
std::vector<std::string> tokenize(std::string_view text);
std::size_t levenshtein(std::string_view a, std::string_view b);
// Jaccard over the sets of lowercase character q-grams; a string shorter
// than q contributes itself as its only gram.
double qgram_jaccard(std::string_view a, std::string_view b, std::size_t q = kQgramSize);

// Symmetric in (a, b). `embeddings` supplies embedding_cosine when both
// concepts are embedded.
FeatureVector extract_features(const Concept& a, const Concept& b,
                               const EmbeddingSet* embeddings = nullptr);

struct LabeledFeatures {
  FeatureVector features;
  std::uint8_t label = 0;
};

struct LinearPriorModel {
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  double temperature = 1.0;

  // w.x + b, before temperature.
  double logit(const FeatureVector& x) const;
  double probability(const FeatureVector& x) const;
};

double sigmoid(double z) noexcept;

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 2000;
  // Weight each class by N / (2 * N_class).
  bool class_weighting = true;
  std::uint64_t seed = 0;
};

struct TrainTrace {
  std::vector<double> loss;  // weighted mean log-loss before each epoch's step
};

// Full-batch gradient descent on weighted logistic loss, starting from
// small seeded Gaussian weights. Throws ConfigError on a single-class set.
LinearPriorModel train_linear_prior(std::span<const LabeledFeatures> examples,
                                    const TrainConfig& config = {},
                                    TrainTrace* trace = nullptr);

// sigmoid(logit / temperature), clamped.
PriorBelief predict_prior(const LinearPriorModel& model, const FeatureVector& features);

// Mean negative log-likelihood of the labels under the model's probabilities.
double negative_log_likelihood(const LinearPriorModel& model,
                               std::span<const LabeledFeatures> examples);

// Returns `model` with the grid temperature minimizing validation NLL
// (ties go to the earlier grid entry); weights are unchanged.
LinearPriorModel calibrate_temperature(LinearPriorModel model,
                                       std::span<const LabeledFeatures> validation,
                                       std::span<const double> grid);

// Reads a priors CSV (left_id,right_id,p_one). Keys are variable_index over
// the vocabulary; values are clamped. Throws InputError on malformed rows,
// unknown ids, probabilities outside [0, 1], and duplicate pairs.
PriorMap load_external_priors(const std::filesystem::path& path,
                              std::span<const Concept> vocabulary, RelationshipKind kind);

}  // namespace relgraph
