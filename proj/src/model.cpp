#include "relgraph/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relgraph/errors.hpp"

namespace relgraph {

namespace {

constexpr std::array<std::size_t, 5> kEquivalenceParams{0, 1, 2, 4, 7};
constexpr std::array<std::size_t, 7> kParentChildParams{0, 1, 2, 3, 4, 5, 7};

// Offset of the first Equivalence pair whose left concept is i.
std::size_t row_offset(std::size_t i, std::size_t n) {
  return i * n - i * (i + 1) / 2;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

}  // namespace

std::string_view to_string(RelationshipKind kind) noexcept {
  return kind == RelationshipKind::Equivalence ? "equivalence"
                                               : "parent-child";
}

RelationshipKind parse_relationship_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "equivalence" || lower == "eq") {
    return RelationshipKind::Equivalence;
  }
  if (lower == "parent-child" || lower == "parentchild" ||
      lower == "parent_child" || lower == "pc") {
    return RelationshipKind::ParentChild;
  }
  throw ConfigError("unknown relationship kind '" + std::string(text) + "'");
}

void validate_vocabulary(std::span<const Concept> concepts) {
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    if (concepts[i].id != i) {
      throw ConfigError("concept ids must be contiguous from 0; found id " +
                        std::to_string(concepts[i].id) + " at position " +
                        std::to_string(i));
    }
    if (is_blank(concepts[i].name)) {
      throw ConfigError("concept " + std::to_string(i) + " has an empty name");
    }
  }
}

ConceptPair canonical_pair(ConceptPair pair, RelationshipKind kind) {
  if (pair.left == pair.right) {
    throw std::domain_error("self pair (" + std::to_string(pair.left) + ", " +
                            std::to_string(pair.right) + ")");
  }
  if (kind == RelationshipKind::Equivalence && pair.left > pair.right) {
    std::swap(pair.left, pair.right);
  }
  return pair;
}

PriorBelief::PriorBelief(double p_one) {
  if (!(p_one >= 0.0 && p_one <= 1.0)) {
    throw std::domain_error("prior probability outside [0, 1]: " +
                            std::to_string(p_one));
  }
  p_one_ = std::clamp(p_one, kPriorEpsilon, 1.0 - kPriorEpsilon);
}

std::size_t variable_index(ConceptId left, ConceptId right, std::size_t n,
                           RelationshipKind kind) {
  if (left >= n || right >= n) {
    throw std::domain_error("concept id out of range for n = " +
                            std::to_string(n));
  }
  const ConceptPair p = canonical_pair({left, right}, kind);
  if (kind == RelationshipKind::Equivalence) {
    return row_offset(p.left, n) + (p.right - p.left - 1);
  }
  return static_cast<std::size_t>(p.left) * (n - 1) +
         (p.right < p.left ? p.right : p.right - 1);
}

ConceptPair pair_from_index(std::size_t index, std::size_t n,
                            RelationshipKind kind) {
  if (index >= dense_variable_count(n, kind)) {
    throw std::domain_error("variable index out of range");
  }
  if (kind == RelationshipKind::ParentChild) {
    const auto left = static_cast<ConceptId>(index / (n - 1));
    auto right = static_cast<ConceptId>(index % (n - 1));
    if (right >= left) ++right;
    return {left, right};
  }
  // Estimate the row from the quadratic, then correct for rounding.
  const double nn = static_cast<double>(n);
  const double disc = (2 * nn - 1) * (2 * nn - 1) - 8.0 * static_cast<double>(index);
  auto i = static_cast<std::size_t>(
      std::max(0.0, std::floor(((2 * nn - 1) - std::sqrt(std::max(0.0, disc))) / 2)));
  while (i > 0 && row_offset(i, n) > index) --i;
  while (i + 1 < n && row_offset(i + 1, n) <= index) ++i;
  const std::size_t j = i + 1 + (index - row_offset(i, n));
  return {static_cast<ConceptId>(i), static_cast<ConceptId>(j)};
}

std::size_t dense_variable_count(std::size_t n, RelationshipKind kind) {
  if (n < 2) return 0;
  return kind == RelationshipKind::Equivalence ? n * (n - 1) / 2 : n * (n - 1);
}

bool is_invalid_config(RelationshipKind kind, std::size_t config) noexcept {
  if (kind == RelationshipKind::ParentChild) {
    return config == config_index(1, 1, 0);
  }
  return config == config_index(0, 1, 1) || config == config_index(1, 0, 1) ||
         config == config_index(1, 1, 0);
}

std::span<const std::size_t> parameter_configs(RelationshipKind kind) noexcept {
  if (kind == RelationshipKind::Equivalence) return kEquivalenceParams;
  return kParentChildParams;
}

std::size_t TernaryPotential::parameter_count(RelationshipKind kind) noexcept {
  return parameter_configs(kind).size();
}

TernaryPotential TernaryPotential::from_theta(RelationshipKind kind,
                                              std::span<const double> theta) {
  const auto configs = parameter_configs(kind);
  if (theta.size() != configs.size()) {
    throw ConfigError(std::string(to_string(kind)) + " potential needs " +
                      std::to_string(configs.size()) + " parameters, got " +
                      std::to_string(theta.size()));
  }
  std::array<double, 8> table{};
  double max_entry = 0.0;
  for (std::size_t p = 0; p < configs.size(); ++p) {
    if (!(std::isfinite(theta[p]) && theta[p] > 0.0)) {
      throw ConfigError("potential parameters must be finite and positive");
    }
    table[configs[p]] = theta[p];
    max_entry = std::max(max_entry, theta[p]);
  }
  for (double& v : table) v /= max_entry;
  return TernaryPotential(kind, table);
}

TernaryPotential TernaryPotential::default_for(RelationshipKind kind) {
  if (kind == RelationshipKind::Equivalence) {
    const std::array<double, 5> theta{1.0, 0.25, 0.25, 0.25, 0.75};
    return from_theta(kind, theta);
  }
  const std::array<double, 7> theta{1.0, 0.25, 0.25, 0.25, 0.25, 0.25, 0.75};
  return from_theta(kind, theta);
}

std::array<double, 8> TernaryPotential::log_table() const noexcept {
  std::array<double, 8> out{};
  for (std::size_t c = 0; c < 8; ++c) {
    out[c] = table_[c] > 0.0 ? std::log(table_[c]) : kNegInf;
  }
  return out;
}

std::vector<double> TernaryPotential::theta() const {
  std::vector<double> out;
  for (std::size_t c : parameter_configs(kind_)) out.push_back(table_[c]);
  return out;
}

}  // namespace relgraph
