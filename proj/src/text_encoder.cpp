#include "hsg/text_encoder.hpp"

#include <cctype>
#include <random>

namespace hsg {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

HashTextEncoder::HashTextEncoder(int dim, std::uint64_t salt) : dim_(dim), salt_(salt) {
  if (dim_ < 1) throw Error("encoder dimension must be positive");
}

Embedding HashTextEncoder::encode(std::string_view text) const {
  std::mt19937_64 rng(fnv1a(normalize_text(text)) ^ salt_);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = normal(rng);
  return Embedding::normalized(v);
}

TableTextEncoder::TableTextEncoder(std::map<std::string, Embedding> table,
                                   std::shared_ptr<const TextEncoder> fallback)
    : fallback_(std::move(fallback)) {
  for (auto& [text, emb] : table) {
    if (dim_ == 0) dim_ = emb.dim();
    if (emb.dim() != dim_) throw Error("text embedding table has mixed dimensions");
    table_.emplace(normalize_text(text), std::move(emb));
  }
  if (dim_ == 0 && fallback_) dim_ = fallback_->dim();
  if (fallback_ && fallback_->dim() != dim_) throw Error("fallback encoder dimension mismatch");
}

Embedding TableTextEncoder::encode(std::string_view text) const {
  if (auto it = table_.find(normalize_text(text)); it != table_.end()) return it->second;
  if (fallback_) return fallback_->encode(text);
  throw Error("no text embedding for \"" + std::string(text) + "\"");
}

Embedding category_embedding(const TextEncoder& encoder, const std::string& category) {
  const Embedding bare = encoder.encode(category);
  const Embedding prompt = encoder.encode("There is the " + category + " in the scene.");
  return Embedding::normalized(Eigen::VectorXd(bare.values().cast<double>() + prompt.values().cast<double>()));
}

}  // namespace hsg
