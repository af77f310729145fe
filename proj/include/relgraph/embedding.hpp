#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "relgraph/model.hpp"

namespace relgraph {

struct ConceptEmbedding {
  ConceptId id = 0;
  std::vector<double> vector;
};

// L2-normalized concept vectors indexed by concept id. Rows are stored
// sparsely so that TF-IDF fallback vectors stay cheap; dense external
// embeddings simply have every component present.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  // All vectors must share one dimension and have a finite, nonzero norm.
  static EmbeddingSet from_dense(std::size_t concept_count,
                                 std::span<const ConceptEmbedding> embeddings);
  // Character-trigram TF-IDF over lowercased, space-padded names.
  static EmbeddingSet char_trigram_tfidf(std::span<const Concept> concepts);
  // `external` when it covers every concept, the TF-IDF fallback otherwise.
  static EmbeddingSet for_concepts(std::span<const Concept> concepts,
                                   const std::optional<EmbeddingSet>& external);

  std::size_t concept_count() const noexcept { return rows_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t embedded_count() const noexcept;
  bool has(ConceptId id) const noexcept { return id < rows_.size() && rows_[id].has_value(); }
  bool covers_all() const noexcept { return embedded_count() == rows_.size(); }

  // Cosine similarity; throws std::out_of_range when either row is missing.
  double cosine(ConceptId a, ConceptId b) const;

 private:
  struct Row {
    std::vector<std::uint32_t> index;  // ascending
    std::vector<double> value;
  };

  std::size_t dimension_ = 0;
  std::vector<std::optional<Row>> rows_;
};

// The k most cosine-similar other concepts, ties by ascending id. k is
// clipped (with a warning on stderr) to the number of other embedded
// concepts. Throws std::out_of_range when `anchor` has no embedding.
std::vector<ConceptId> top_k_neighbors(ConceptId anchor, const EmbeddingSet& embeddings,
                                       std::size_t k);

}  // namespace relgraph
