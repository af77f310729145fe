#include "relgraph/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "relgraph/errors.hpp"

namespace relgraph {

namespace {

std::string path_string(const std::filesystem::path& p) { return p.string(); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path_string(path), 0, "cannot open for writing");
  return out;
}

ConceptId parse_concept_id(std::string_view text, std::size_t concept_count,
                           const std::filesystem::path& path, std::size_t line) {
  const long long v = parse_integer(text, path, line);
  if (v < 0 || static_cast<unsigned long long>(v) >= concept_count) {
    throw InputError(path_string(path), line, "unknown concept id " + std::string(text));
  }
  return static_cast<ConceptId>(v);
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path_string(path), 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  CsvTable table;
  std::vector<std::string> fields;
  std::string field;
  std::size_t line = 1;
  std::size_t row_line = 1;
  bool quoted = false;
  bool row_has_content = false;

  auto end_row = [&] {
    fields.push_back(std::move(field));
    field.clear();
    const bool blank = !row_has_content && fields.size() == 1 && fields[0].empty();
    if (!blank) {
      if (table.header.empty() && table.rows.empty()) {
        for (auto& f : fields) f = trim(f);
        table.header = std::move(fields);
      } else {
        table.rows.push_back({row_line, std::move(fields)});
      }
    }
    fields.clear();
    row_has_content = false;
  };

  std::size_t i = 0;
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) i = 3;  // UTF-8 BOM
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        row_line = ++line;
        break;
      default:
        field += c;
        row_has_content = true;
    }
  }
  if (quoted) throw InputError(path_string(path), row_line, "unterminated quoted field");
  if (row_has_content || !field.empty()) end_row();
  if (table.header.empty()) throw InputError(path_string(path), 0, "missing header row");
  return table;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void expect_header(const CsvTable& table, const std::filesystem::path& path,
                   std::span<const std::string_view> expected) {
  bool ok = table.header.size() >= expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = table.header[i] == expected[i];
  if (!ok) {
    std::string want;
    for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
    throw InputError(path_string(path), 1, "expected header '" + want + "'");
  }
}

long long parse_integer(std::string_view text, const std::filesystem::path& path,
                        std::size_t line) {
  const std::string t = trim(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InputError(path_string(path), line, "not an integer: '" + std::string(text) + "'");
  }
  return v;
}

double parse_real(std::string_view text, const std::filesystem::path& path, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InputError(path_string(path), line, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<Concept> read_concepts(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  static constexpr std::string_view kHeader[] = {"id", "name"};
  expect_header(table, path, kHeader);
  std::vector<Concept> out;
  for (const auto& row : table.rows) {
    if (row.fields.size() < 2 || row.fields.size() > 3) {
      throw InputError(path_string(path), row.line, "expected 2 or 3 fields");
    }
    Concept c;
    const long long id = parse_integer(row.fields[0], path, row.line);
    if (id != static_cast<long long>(out.size())) {
      throw InputError(path_string(path), row.line,
                       "concept ids must be contiguous from 0; expected " +
                           std::to_string(out.size()));
    }
    c.id = static_cast<ConceptId>(id);
    c.name = trim(row.fields[1]);
    if (c.name.empty()) throw InputError(path_string(path), row.line, "empty concept name");
    if (row.fields.size() == 3 && !row.fields[2].empty()) {
      std::string_view values = row.fields[2];
      std::size_t start = 0;
      while (start <= values.size()) {
        const auto bar = values.find('|', start);
        const auto piece = values.substr(start, bar == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : bar - start);
        if (!piece.empty()) c.values.emplace_back(piece);
        if (bar == std::string_view::npos) break;
        start = bar + 1;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<LabeledPair> read_labels(const std::filesystem::path& path,
                                     std::size_t concept_count, RelationshipKind kind) {
  const CsvTable table = read_csv(path);
  static constexpr std::string_view kHeader[] = {"left_id", "right_id", "label"};
  expect_header(table, path, kHeader);
  std::vector<LabeledPair> out;
  std::set<ConceptPair> seen;
  for (const auto& row : table.rows) {
    if (row.fields.size() != 3) throw InputError(path_string(path), row.line, "expected 3 fields");
    const ConceptId left = parse_concept_id(row.fields[0], concept_count, path, row.line);
    const ConceptId right = parse_concept_id(row.fields[1], concept_count, path, row.line);
    if (left == right) throw InputError(path_string(path), row.line, "self pair");
    const long long label = parse_integer(row.fields[2], path, row.line);
    if (label != 0 && label != 1) {
      throw InputError(path_string(path), row.line, "label must be 0 or 1");
    }
    const ConceptPair pair = canonical_pair({left, right}, kind);
    if (!seen.insert(pair).second) {
      throw InputError(path_string(path), row.line, "duplicate pair");
    }
    out.push_back({pair, static_cast<std::uint8_t>(label)});
  }
  return out;
}

EmbeddingSet read_embeddings(const std::filesystem::path& path, std::size_t concept_count) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header[0] != "id" || table.header.size() < 2) {
    throw InputError(path_string(path), 1, "expected header 'id,v0,v1,...'");
  }
  std::vector<ConceptEmbedding> rows;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw InputError(path_string(path), row.line, "field count does not match header");
    }
    ConceptEmbedding e;
    e.id = parse_concept_id(row.fields[0], concept_count, path, row.line);
    for (std::size_t d = 1; d < row.fields.size(); ++d) {
      e.vector.push_back(parse_real(row.fields[d], path, row.line));
    }
    rows.push_back(std::move(e));
  }
  try {
    return EmbeddingSet::from_dense(concept_count, rows);
  } catch (const ConfigError& e) {
    throw InputError(path_string(path), 0, e.what());
  }
}

void write_concepts(const std::filesystem::path& path, std::span<const Concept> concepts) {
  auto out = open_output(path);
  out << "id,name,values\n";
  for (const auto& c : concepts) {
    std::string values;
    for (const auto& v : c.values) values += (values.empty() ? "" : "|") + v;
    out << c.id << ',' << csv_field(c.name) << ',' << csv_field(values) << '\n';
  }
}

void write_priors(const std::filesystem::path& path,
                  std::span<const std::pair<ConceptPair, double>> priors) {
  auto out = open_output(path);
  out.precision(17);
  out << "left_id,right_id,p_one\n";
  for (const auto& [pair, p] : priors) out << pair.left << ',' << pair.right << ',' << p << '\n';
}

void write_labels(const std::filesystem::path& path, std::span<const LabeledPair> labels) {
  auto out = open_output(path);
  out << "left_id,right_id,label\n";
  for (const auto& l : labels) {
    out << l.pair.left << ',' << l.pair.right << ',' << static_cast<int>(l.label) << '\n';
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto out = open_output(path);
  out << text;
}

}  // namespace relgraph
