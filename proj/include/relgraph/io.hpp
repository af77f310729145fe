#pragma once

// Line-oriented file formats (UTF-8 CSV with a header row):
//   concepts    id,name,values      values '|'-separated, optional column
//   priors      left_id,right_id,p_one
//   labels      left_id,right_id,label
//   embeddings  id,v0,v1,...

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relgraph/embedding.hpp"
#include "relgraph/model.hpp"

namespace relgraph {

struct CsvRow {
  std::size_t line = 0;  // 1-based line in the source file
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

// RFC 4180-style parsing: quoted fields may hold commas, quotes ("") and
// newlines. Blank lines are skipped. Throws InputError.
CsvTable read_csv(const std::filesystem::path& path);
std::string csv_field(std::string_view text);

// Throws InputError unless the header starts with `expected`.
void expect_header(const CsvTable& table, const std::filesystem::path& path,
                   std::span<const std::string_view> expected);

long long parse_integer(std::string_view text, const std::filesystem::path& path,
                        std::size_t line);
double parse_real(std::string_view text, const std::filesystem::path& path,
                  std::size_t line);

struct LabeledPair {
  ConceptPair pair;
  std::uint8_t label = 0;
};

std::vector<Concept> read_concepts(const std::filesystem::path& path);
// Pairs are canonicalized under `kind`; unknown ids and duplicates throw.
std::vector<LabeledPair> read_labels(const std::filesystem::path& path,
                                     std::size_t concept_count, RelationshipKind kind);
EmbeddingSet read_embeddings(const std::filesystem::path& path, std::size_t concept_count);

void write_concepts(const std::filesystem::path& path, std::span<const Concept> concepts);
void write_priors(const std::filesystem::path& path,
                  std::span<const std::pair<ConceptPair, double>> priors);
void write_labels(const std::filesystem::path& path, std::span<const LabeledPair> labels);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace relgraph
