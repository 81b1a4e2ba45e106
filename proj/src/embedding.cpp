#include "hsg/embedding.hpp"

#include <cmath>

namespace hsg {

namespace {
constexpr double kDegenerateNorm = 1e-9;
}

std::optional<Embedding> Embedding::try_normalized(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!std::isfinite(norm) || norm < kDegenerateNorm) return std::nullopt;
  return Embedding((v / norm).cast<float>());
}

Embedding Embedding::normalized(const Eigen::VectorXd& v) {
  auto e = try_normalized(v);
  if (!e) throw Error("degenerate embedding");
  return *e;
}

Embedding Embedding::normalized(const Eigen::VectorXf& v) { return normalized(Eigen::VectorXd(v.cast<double>())); }

Embedding Embedding::from_unit(Eigen::VectorXf v) {
  const double norm = v.cast<double>().norm();
  if (std::abs(norm - 1.0) > 1e-4) {
    throw Error("embedding is not unit norm (norm " + std::to_string(norm) + ")");
  }
  return Embedding(std::move(v));
}

double Embedding::cosine(const Embedding& other) const {
  if (dim() != other.dim()) throw Error("embedding dimension mismatch");
  return values_.cast<double>().dot(other.values_.cast<double>());
}

std::optional<Embedding> weighted_mean(std::span<const Embedding> items, std::span<const double> weights) {
  if (items.empty()) return std::nullopt;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(items.front().dim());
  for (std::size_t i = 0; i < items.size(); ++i) {
    sum += weights[i] * items[i].values().cast<double>();
  }
  return Embedding::try_normalized(sum);
}

std::vector<double> cosine_scores(const Embedding& query, std::span<const Embedding> candidates) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(query.cosine(c));
  return out;
}

}  // namespace hsg
