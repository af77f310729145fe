#include "relgraph/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>

#include "relgraph/errors.hpp"

namespace relgraph {

EmbeddingSet EmbeddingSet::from_dense(std::size_t concept_count,
                                      std::span<const ConceptEmbedding> embeddings) {
  EmbeddingSet out;
  out.rows_.resize(concept_count);
  bool first = true;
  for (const auto& e : embeddings) {
    if (e.id >= concept_count) {
      throw ConfigError("embedding for unknown concept id " + std::to_string(e.id));
    }
    if (first) {
      out.dimension_ = e.vector.size();
      first = false;
    } else if (e.vector.size() != out.dimension_) {
      throw ConfigError("embedding dimensions differ (concept " + std::to_string(e.id) + ")");
    }
    if (out.rows_[e.id]) {
      throw ConfigError("duplicate embedding for concept " + std::to_string(e.id));
    }
    double norm = 0.0;
    for (double x : e.vector) norm += x * x;
    norm = std::sqrt(norm);
    if (!std::isfinite(norm) || norm == 0.0) {
      throw ConfigError("embedding for concept " + std::to_string(e.id) +
                        " has a zero or non-finite norm");
    }
    Row row;
    row.index.resize(e.vector.size());
    row.value.resize(e.vector.size());
    for (std::size_t d = 0; d < e.vector.size(); ++d) {
      row.index[d] = static_cast<std::uint32_t>(d);
      row.value[d] = e.vector[d] / norm;
    }
    out.rows_[e.id] = std::move(row);
  }
  return out;
}

EmbeddingSet EmbeddingSet::char_trigram_tfidf(std::span<const Concept> concepts) {
  std::map<std::string, std::uint32_t> vocab;
  std::vector<std::map<std::uint32_t, double>> counts(concepts.size());
  for (std::size_t c = 0; c < concepts.size(); ++c) {
    std::string padded = " ";
    for (unsigned char ch : concepts[c].name) padded += static_cast<char>(std::tolower(ch));
    padded += ' ';
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      auto [it, inserted] =
          vocab.emplace(padded.substr(i, 3), static_cast<std::uint32_t>(vocab.size()));
      counts[c][it->second] += 1.0;
    }
  }
  std::vector<double> df(vocab.size(), 0.0);
  for (const auto& row : counts) {
    for (const auto& [term, tf] : row) df[term] += 1.0;
  }
  const double n = static_cast<double>(concepts.size());

  EmbeddingSet out;
  out.dimension_ = vocab.size();
  out.rows_.resize(concepts.size());
  for (std::size_t c = 0; c < concepts.size(); ++c) {
    Row row;
    double norm = 0.0;
    for (const auto& [term, tf] : counts[c]) {
      const double w = tf * (std::log((1.0 + n) / (1.0 + df[term])) + 1.0);
      row.index.push_back(term);
      row.value.push_back(w);
      norm += w * w;
    }
    norm = std::sqrt(norm);
    for (double& v : row.value) v /= norm;
    out.rows_[c] = std::move(row);
  }
  return out;
}

EmbeddingSet EmbeddingSet::for_concepts(std::span<const Concept> concepts,
                                        const std::optional<EmbeddingSet>& external) {
  if (external && external->concept_count() == concepts.size() && external->covers_all()) {
    return *external;
  }
  if (external) {
    std::cerr << "warning: embeddings do not cover every concept; "
                 "using character-trigram TF-IDF vectors\n";
  }
  return char_trigram_tfidf(concepts);
}

std::size_t EmbeddingSet::embedded_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return r.has_value(); }));
}

double EmbeddingSet::cosine(ConceptId a, ConceptId b) const {
  if (!has(a) || !has(b)) {
    throw std::out_of_range("no embedding for concept " + std::to_string(has(a) ? b : a));
  }
  const Row& x = *rows_[a];
  const Row& y = *rows_[b];
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.index.size() && j < y.index.size()) {
    if (x.index[i] < y.index[j]) {
      ++i;
    } else if (y.index[j] < x.index[i]) {
      ++j;
    } else {
      dot += x.value[i++] * y.value[j++];
    }
  }
  return dot;
}

std::vector<ConceptId> top_k_neighbors(ConceptId anchor, const EmbeddingSet& embeddings,
                                       std::size_t k) {
  if (!embeddings.has(anchor)) {
    throw std::out_of_range("no embedding for anchor " + std::to_string(anchor));
  }
  std::vector<std::pair<double, ConceptId>> scored;
  for (std::size_t c = 0; c < embeddings.concept_count(); ++c) {
    const auto id = static_cast<ConceptId>(c);
    if (id == anchor || !embeddings.has(id)) continue;
    scored.emplace_back(embeddings.cosine(anchor, id), id);
  }
  if (k > scored.size()) {
    std::cerr << "warning: k = " << k << " exceeds the " << scored.size()
              << " other embedded concepts; clipping\n";
    k = scored.size();
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), better);
  std::vector<ConceptId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace relgraph
