#include "relgraph/eval.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "relgraph/errors.hpp"

namespace relgraph {

namespace {

Metrics finish(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  if (tp + fp > 0) {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    m.zero_division = true;
  }
  if (tp + fn > 0) {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  } else {
    m.zero_division = true;
  }
  if (m.precision + m.recall > 0) {
    m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.zero_division = true;
  }
  return m;
}

// Pronounceable pseudo-words, unique within one generator run.
class WordSource {
 public:
  explicit WordSource(std::mt19937_64& rng) : rng_(rng) {}

  std::string next(std::size_t syllables) {
    static constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                   "p", "r", "s", "t", "v", "z", "ch", "sh"};
    static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    std::uniform_int_distribution<std::size_t> onset(0, std::size(kOnsets) - 1);
    std::uniform_int_distribution<std::size_t> vowel(0, std::size(kVowels) - 1);
    for (;;) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[onset(rng_)];
        w += kVowels[vowel(rng_)];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::mt19937_64& rng_;
  std::set<std::string> used_;
};

double draw_beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

Metrics prf1(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("prediction and gold coverage differ");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool g = gold[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
    tn += !p && !g;
  }
  return finish(tp, fp, fn, tn);
}

Metrics prf1(const std::map<ConceptPair, std::uint8_t>& predicted,
             const std::map<ConceptPair, std::uint8_t>& gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("prediction and gold coverage differ");
  }
  std::vector<std::uint8_t> p, g;
  p.reserve(gold.size());
  g.reserve(gold.size());
  for (auto it = predicted.begin(), jt = gold.begin(); jt != gold.end(); ++it, ++jt) {
    if (it->first != jt->first) throw std::invalid_argument("prediction and gold coverage differ");
    p.push_back(it->second);
    g.push_back(jt->second);
  }
  return prf1(p, g);
}

ViolationAudit count_transitivity_violations(std::span<const std::uint8_t> labels,
                                             std::span<const Clique> cliques,
                                             RelationshipKind kind) {
  ViolationAudit audit;
  for (std::size_t t = 0; t < cliques.size(); ++t) {
    const Clique& c = cliques[t];
    if (is_invalid_config(kind, config_index(labels[c[0]], labels[c[1]], labels[c[2]]))) {
      audit.cliques.push_back(t);
    }
  }
  audit.count = audit.cliques.size();
  return audit;
}

void SyntheticConfig::validate() const {
  if (n_concepts < 2) throw ConfigError("synthetic data needs at least 2 concepts");
  if (n_clusters < 1 || n_clusters > n_concepts) {
    throw ConfigError("cluster/root count must lie in [1, n_concepts]");
  }
  if (!(prior_noise >= 0.0 && prior_noise <= 0.5)) {
    throw ConfigError("prior noise must lie in [0, 0.5]");
  }
  if (!(train_fraction >= 0.0 && validation_fraction >= 0.0 &&
        train_fraction + validation_fraction <= 1.0)) {
    throw ConfigError("split fractions must be non-negative and sum to at most 1");
  }
}

PriorMap SyntheticDataset::prior_map() const {
  PriorMap out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.emplace(variable_index(pairs[i].left, pairs[i].right, concepts.size(), kind),
                PriorBelief(prior[i]));
  }
  return out;
}

std::vector<std::pair<ConceptPair, double>> SyntheticDataset::prior_rows() const {
  std::vector<std::pair<ConceptPair, double>> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out.emplace_back(pairs[i], prior[i]);
  return out;
}

std::vector<LabeledPair> SyntheticDataset::labels(std::span<const std::size_t> split) const {
  std::vector<LabeledPair> out;
  out.reserve(split.size());
  for (std::size_t i : split) out.push_back({pairs[i], gold[i]});
  return out;
}

std::vector<LabeledPair> SyntheticDataset::all_labels() const {
  std::vector<LabeledPair> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back({pairs[i], gold[i]});
  return out;
}

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const std::size_t n = config.n_concepts;
  const RelationshipKind kind = config.kind;
  std::mt19937_64 rng(config.seed);
  WordSource words(rng);

  SyntheticDataset ds;
  ds.kind = kind;
  ds.concepts.resize(n);
  ds.structure.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) ds.concepts[i].id = static_cast<ConceptId>(i);

  // ancestors[c] lists every ancestor of c (ParentChild only).
  std::vector<std::vector<ConceptId>> ancestors(n);
  if (kind == RelationshipKind::Equivalence) {
    std::vector<long> cluster(n);
    for (std::size_t i = 0; i < n; ++i) {
      cluster[i] = i < config.n_clusters
                       ? static_cast<long>(i)
                       : static_cast<long>(std::uniform_int_distribution<std::size_t>(
                             0, config.n_clusters - 1)(rng));
    }
    std::shuffle(cluster.begin(), cluster.end(), rng);
    std::vector<std::string> stems(config.n_clusters);
    std::vector<std::vector<std::string>> pools(config.n_clusters);
    for (std::size_t c = 0; c < config.n_clusters; ++c) {
      stems[c] = words.next(3);
      for (int v = 0; v < 5; ++v) pools[c].push_back(words.next(2));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(cluster[i]);
      ds.structure[i] = cluster[i];
      ds.concepts[i].name = stems[c] + " " + words.next(2);
      std::uniform_int_distribution<std::size_t> pick(0, pools[c].size() - 1);
      for (int v = 0; v < 3; ++v) ds.concepts[i].values.push_back(pools[c][pick(rng)]);
    }
  } else {
    std::vector<ConceptId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<ConceptId>(i);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < n; ++r) {
      const ConceptId c = order[r];
      if (r < config.n_clusters) {
        ds.concepts[c].name = words.next(3);
        continue;
      }
      const ConceptId parent =
          order[std::uniform_int_distribution<std::size_t>(0, r - 1)(rng)];
      ds.structure[c] = static_cast<long>(parent);
      ancestors[c] = ancestors[parent];
      ancestors[c].push_back(parent);
      ds.concepts[c].name = ds.concepts[parent].name + " " + words.next(2);
    }
  }

  auto is_positive = [&](ConceptPair p) {
    if (kind == RelationshipKind::Equivalence) {
      return ds.structure[p.left] == ds.structure[p.right];
    }
    const auto& anc = ancestors[p.right];
    return std::find(anc.begin(), anc.end(), p.left) != anc.end();
  };

  std::set<std::size_t> chosen;
  if (config.candidate_negatives == 0) {
    for (std::size_t i = 0; i < dense_variable_count(n, kind); ++i) chosen.insert(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const ConceptPair p{static_cast<ConceptId>(i), static_cast<ConceptId>(j)};
        if (canonical_pair(p, kind) == p && is_positive(p)) {
          chosen.insert(variable_index(p.left, p.right, n, kind));
        }
      }
    }
    std::uniform_int_distribution<std::size_t> other(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t added = 0;
      for (std::size_t attempt = 0; added < config.candidate_negatives && attempt < 20 * n;
           ++attempt) {
        const std::size_t j = other(rng);
        if (j == i) continue;
        const ConceptPair p{static_cast<ConceptId>(i), static_cast<ConceptId>(j)};
        if (is_positive(canonical_pair(p, kind))) continue;
        if (chosen.insert(variable_index(p.left, p.right, n, kind)).second) ++added;
      }
    }
  }

  std::bernoulli_distribution flip(config.prior_noise);
  for (std::size_t index : chosen) {
    const ConceptPair p = pair_from_index(index, n, kind);
    const std::uint8_t g = is_positive(p) ? 1 : 0;
    const bool noisy = flip(rng) ? g == 0 : g == 1;
    double confidence = draw_beta(rng, 8.0, 2.0);
    if (confidence <= 0.5) confidence = 1.0 - confidence;
    ds.pairs.push_back(p);
    ds.gold.push_back(g);
    ds.prior.push_back(noisy ? confidence : 1.0 - confidence);
  }

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) by_class[ds.gold[i]].push_back(i);
  for (auto& group : by_class) {
    std::shuffle(group.begin(), group.end(), rng);
    const auto n_train = static_cast<std::size_t>(config.train_fraction * group.size());
    const auto n_val = static_cast<std::size_t>(config.validation_fraction * group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      auto& split = i < n_train ? ds.train : (i < n_train + n_val ? ds.validation : ds.test);
      split.push_back(group[i]);
    }
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.validation.begin(), ds.validation.end());
  std::sort(ds.test.begin(), ds.test.end());
  return ds;
}

}  // namespace relgraph
