#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "relgraph/errors.hpp"
#include "relgraph/eval.hpp"
#include "relgraph/priors.hpp"

using namespace relgraph;

namespace {

// Textbook full-matrix Levenshtein distance.
std::size_t lev_oracle(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

std::string random_word(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> ch(0, 5);
  const char alphabet[] = "ab _Cd";
  std::string s(len(rng), 'a');
  for (char& c : s) c = alphabet[ch(rng)];
  return s;
}

Concept named(ConceptId id, std::string name) { return Concept{id, std::move(name), {}}; }

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "relgraph_test_priors";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << body;
  return path;
}

std::vector<Concept> vocabulary(std::size_t n) {
  std::vector<Concept> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(named(static_cast<ConceptId>(i), "c" + std::to_string(i)));
  return out;
}

LabeledFeatures scalar_example(double x, std::uint8_t label) {
  LabeledFeatures e;
  e.features.qgram_similarity = x;
  e.features.word_count_ratio = 0.0;
  e.features.char_count_ratio = 0.0;
  e.label = label;
  return e;
}

}  // namespace

TEST_CASE("tokenize") {
  const std::vector<std::string> expected{"music", "artist", "id"};
  CHECK(tokenize("Music_Artist ID") == expected);
  CHECK(tokenize("  ").empty());
}

TEST_CASE("levenshtein matches the dynamic-programming oracle") {
  CHECK(levenshtein("music artist", "musical artist") == 2);
  CHECK(levenshtein("", "abc") == 3);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const std::string a = random_word(rng, 10);
    const std::string b = random_word(rng, 10);
    CHECK(levenshtein(a, b) == lev_oracle(a, b));
  }
}

TEST_CASE("feature examples") {
  const auto same = extract_features(named(0, "music artist"), named(1, "music artist"));
  CHECK(same.qgram_similarity == doctest::Approx(1.0));
  CHECK(same.token_jaccard == doctest::Approx(1.0));
  CHECK(same.edit_similarity == doctest::Approx(1.0));
  CHECK(same.word_count_ratio == doctest::Approx(1.0));
  CHECK(same.char_count_ratio == doctest::Approx(1.0));

  const auto close = extract_features(named(0, "music artist"), named(1, "musical artist"));
  CHECK(close.token_jaccard == doctest::Approx(1.0 / 3.0));
  CHECK(close.edit_similarity == doctest::Approx(1.0 - 2.0 / 14.0));
  CHECK(close.char_count_ratio == doctest::Approx(12.0 / 14.0));

  const auto apart = extract_features(named(0, "zip code"), named(1, "latitude"));
  CHECK(apart.token_jaccard == 0.0);
  CHECK_FALSE(apart.value_jaccard.has_value());
  CHECK_FALSE(apart.embedding_cosine.has_value());

  // Trigram sets {abc, bcd} and {bcd, cde}.
  CHECK(qgram_jaccard("abcd", "bcde") == doctest::Approx(1.0 / 3.0));
  CHECK(qgram_jaccard("ab", "ab") == doctest::Approx(1.0));
}

TEST_CASE("features are symmetric and bounded") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 250; ++i) {
    Concept a = named(0, "x" + random_word(rng, 12));
    Concept b = named(1, "x" + random_word(rng, 12));
    if (i % 2) {
      a.values = {random_word(rng, 3), random_word(rng, 3)};
      b.values = {random_word(rng, 3)};
    }
    const auto ab = extract_features(a, b).as_array();
    const auto ba = extract_features(b, a).as_array();
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
      CHECK(ab[d] == doctest::Approx(ba[d]));
      CHECK(ab[d] >= -1.0);
      CHECK(ab[d] <= 1.0);
    }
    CHECK(ab[2] >= 0.0);
  }
}

TEST_CASE("embedding cosine feature") {
  const std::vector<Concept> cs{named(0, "alpha"), named(1, "beta")};
  const std::vector<ConceptEmbedding> rows{{0, {1.0, 0.0}}, {1, {1.0, 1.0}}};
  const EmbeddingSet emb = EmbeddingSet::from_dense(2, rows);
  const auto f = extract_features(cs[0], cs[1], &emb);
  REQUIRE(f.embedding_cosine.has_value());
  CHECK(*f.embedding_cosine == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("sigmoid and temperature") {
  LinearPriorModel m;
  FeatureVector x;
  x.word_count_ratio = 0.0;
  x.char_count_ratio = 0.0;
  m.bias = 0.0;
  CHECK(predict_prior(m, x).p_one() == doctest::Approx(0.5));
  m.bias = 4.0;
  CHECK(predict_prior(m, x).p_one() == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))));
  m.temperature = 4.0;
  CHECK(predict_prior(m, x).p_one() == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) <= 1.0);
}

TEST_CASE("temperature preserves the argmax") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 3.0);
  std::uniform_real_distribution<double> t(0.1, 10.0);
  for (int i = 0; i < 250; ++i) {
    LinearPriorModel m;
    FeatureVector x;
    m.bias = z(rng);
    const std::uint8_t raw = predict_prior(m, x).argmax();
    m.temperature = t(rng);
    CHECK(predict_prior(m, x).argmax() == raw);
  }
}

TEST_CASE("training on a separable set") {
  std::vector<LabeledFeatures> data;
  for (int i = 0; i < 10; ++i) {
    data.push_back(scalar_example(1.0, 1));
    data.push_back(scalar_example(0.0, 0));
  }
  TrainTrace trace;
  const LinearPriorModel m = train_linear_prior(data, {}, &trace);
  for (const auto& e : data) CHECK(predict_prior(m, e.features).argmax() == e.label);
  CHECK(trace.loss.back() < trace.loss.front());
  for (std::size_t i = 1; i < trace.loss.size(); ++i) CHECK(trace.loss[i] <= trace.loss[i - 1] + 1e-12);

  const LinearPriorModel again = train_linear_prior(data, {});
  CHECK(again.weights == m.weights);
  CHECK(again.bias == m.bias);
}

TEST_CASE("uninformative features predict the class prior") {
  std::vector<LabeledFeatures> data;
  for (int i = 0; i < 30; ++i) data.push_back(scalar_example(0.0, i < 10 ? 1 : 0));
  TrainConfig cfg;
  cfg.class_weighting = false;
  cfg.epochs = 5000;
  const LinearPriorModel m = train_linear_prior(data, cfg);
  CHECK(predict_prior(m, data[0].features).p_one() == doctest::Approx(10.0 / 30.0).epsilon(1e-3));
}

TEST_CASE("single-class training set is rejected") {
  std::vector<LabeledFeatures> data{scalar_example(1.0, 1), scalar_example(0.0, 1)};
  CHECK_THROWS_AS(train_linear_prior(data), ConfigError);
}

TEST_CASE("temperature calibration") {
  std::vector<LabeledFeatures> val;
  for (int i = 0; i < 50; ++i) val.push_back(scalar_example(1.0, i % 2));
  LinearPriorModel over;
  over.weights[0] = 6.0;  // p = sigmoid(6) > 0.99 on every example
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  const LinearPriorModel tuned = calibrate_temperature(over, val, grid);
  // Oracle: direct NLL for each grid temperature.
  double best = 0.0, best_nll = 1e300;
  for (double t : grid) {
    const double p = 1.0 / (1.0 + std::exp(-6.0 / t));
    const double nll = -0.5 * std::log(p) - 0.5 * std::log(1.0 - p);
    if (nll < best_nll) best_nll = nll, best = t;
  }
  CHECK(tuned.temperature == best);
  CHECK(tuned.temperature > 1.0);
  CHECK(tuned.weights == over.weights);

  // A model whose probabilities match the empirical rate keeps temperature 1.
  std::vector<LabeledFeatures> calibrated;
  for (int i = 0; i < 40; ++i) calibrated.push_back(scalar_example(1.0, i % 4 == 0 ? 0 : 1));
  LinearPriorModel exact;
  exact.weights[0] = std::log(3.0);
  const std::vector<double> small{1.0, 2.0, 4.0};
  CHECK(calibrate_temperature(exact, calibrated, small).temperature == 1.0);

  CHECK_THROWS_AS(calibrate_temperature(over, val, std::span<const double>{}), ConfigError);
}

TEST_CASE("external priors") {
  const auto vocab = vocabulary(3);
  const auto kind = RelationshipKind::Equivalence;
  const auto ok = temp_file("ok.csv", "left_id,right_id,p_one\n0,1,0.9\n2,0,1.0\n");
  const PriorMap m = load_external_priors(ok, vocab, kind);
  CHECK(m.size() == 2);
  CHECK(m.at(variable_index(0, 1, 3, kind)).p_one() == doctest::Approx(0.9));
  CHECK(m.at(variable_index(0, 2, 3, kind)).p_one() == doctest::Approx(1.0 - kPriorEpsilon));

  const auto dup = temp_file("dup.csv", "left_id,right_id,p_one\n0,1,0.9\n1,0,0.2\n");
  CHECK_THROWS_AS(load_external_priors(dup, vocab, kind), InputError);
  // Ordered pairs are distinct under ParentChild.
  CHECK(load_external_priors(dup, vocab, RelationshipKind::ParentChild).size() == 2);

  const auto bad = temp_file("bad.csv", "left_id,right_id,p_one\n0,1,0.9\n0,2,abc\n");
  try {
    load_external_priors(bad, vocab, kind);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  const auto unknown = temp_file("unknown.csv", "left_id,right_id,p_one\n0,7,0.5\n");
  CHECK_THROWS_AS(load_external_priors(unknown, vocab, kind), InputError);
  const auto range = temp_file("range.csv", "left_id,right_id,p_one\n0,1,1.5\n");
  CHECK_THROWS_AS(load_external_priors(range, vocab, kind), InputError);
  CHECK_THROWS_AS(load_external_priors("/nonexistent/priors.csv", vocab, kind), InputError);
}

TEST_CASE("noise-free synthetic pairs are learnable") {
  SyntheticConfig cfg;
  cfg.n_concepts = 21;  // 210 pairs
  cfg.n_clusters = 5;
  cfg.prior_noise = 0.0;
  cfg.seed = 4;
  const SyntheticDataset data = generate_synthetic(cfg);
  REQUIRE(data.pairs.size() == 210);
  auto featurize = [&](const std::vector<std::size_t>& split) {
    std::vector<LabeledFeatures> out;
    for (std::size_t i : split) {
      const ConceptPair p = data.pairs[i];
      out.push_back({extract_features(data.concepts[p.left], data.concepts[p.right]), data.gold[i]});
    }
    return out;
  };
  const auto train = featurize(data.train);
  const auto val = featurize(data.validation);
  const LinearPriorModel m = train_linear_prior(train);
  std::vector<std::uint8_t> pred, gold;
  for (const auto& e : val) {
    pred.push_back(predict_prior(m, e.features).argmax());
    gold.push_back(e.label);
  }
  CHECK(prf1(pred, gold).f1 >= 0.95);
}
