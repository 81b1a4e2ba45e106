#pragma once

#include "hsg/embedding.hpp"

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hsg {

/// Maps text to an embedding in the scene's feature space.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual Embedding encode(std::string_view text) const = 0;
  virtual int dim() const = 0;
};

/// Deterministic stand-in: the vector is a seeded Gaussian draw keyed by a
/// hash of the text, so equal strings map to equal vectors on every run.
class HashTextEncoder final : public TextEncoder {
 public:
  explicit HashTextEncoder(int dim, std::uint64_t salt = 0);
  Embedding encode(std::string_view text) const override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  std::uint64_t salt_;
};

/// Lookup table of precomputed text embeddings, with an optional fallback
/// for strings missing from the table.
class TableTextEncoder final : public TextEncoder {
 public:
  TableTextEncoder(std::map<std::string, Embedding> table, std::shared_ptr<const TextEncoder> fallback = nullptr);
  Embedding encode(std::string_view text) const override;
  int dim() const override { return dim_; }
  const std::map<std::string, Embedding>& table() const { return table_; }

 private:
  std::map<std::string, Embedding> table_;
  std::shared_ptr<const TextEncoder> fallback_;
  int dim_ = 0;
};

std::uint64_t fnv1a(std::string_view text);

/// Category embedding used for labelling: the mean of the bare category and
/// of "There is the {category} in the scene.", renormalized.
Embedding category_embedding(const TextEncoder& encoder, const std::string& category);

/// Normalizes free text for table lookup: lower case, single spaces, trimmed.
std::string normalize_text(std::string_view text);

}  // namespace hsg
