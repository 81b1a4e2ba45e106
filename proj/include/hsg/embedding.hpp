#pragma once

#include "hsg/geometry.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace hsg {

/// Unit-norm vision-language feature. The dimension is fixed per scene.
class Embedding {
 public:
  Embedding() = default;

  /// Normalizes `v`; throws "degenerate embedding" when its norm is < 1e-9.
  static Embedding normalized(const Eigen::VectorXf& v);
  static Embedding normalized(const Eigen::VectorXd& v);
  static std::optional<Embedding> try_normalized(const Eigen::VectorXd& v);
  /// Adopts `v` as is; throws unless its norm is 1 within 1e-4.
  static Embedding from_unit(Eigen::VectorXf v);

  const Eigen::VectorXf& values() const { return values_; }
  int dim() const { return static_cast<int>(values_.size()); }
  bool empty() const { return values_.size() == 0; }

  /// Cosine similarity; both operands are unit norm so this is a dot product.
  double cosine(const Embedding& other) const;

  bool operator==(const Embedding& other) const {
    return values_.size() == other.values_.size() && values_ == other.values_;
  }

 private:
  explicit Embedding(Eigen::VectorXf v) : values_(std::move(v)) {}
  Eigen::VectorXf values_;
};

/// Normalized weighted mean; nullopt when the weighted sum cancels out.
std::optional<Embedding> weighted_mean(std::span<const Embedding> items, std::span<const double> weights);

/// Cosine of `query` against each candidate, in candidate order.
std::vector<double> cosine_scores(const Embedding& query, std::span<const Embedding> candidates);

}  // namespace hsg
