#ifndef OBA_ORDINAL_HPP
#define OBA_ORDINAL_HPP

#include <cstdint>
#include <vector>

#include "oba/tensor.hpp"

namespace oba {

/// Rank thresholds r_k = k * eta for k = 1 .. ceil(y_max / eta).
class RankPartition {
 public:
  RankPartition(double eta, double y_max);

  double eta() const { return eta_; }
  double y_max() const { return y_max_; }
  /// Number of binary classifiers, K - 1.
  Index size() const { return count_; }
  /// Threshold of the k-th classifier, k in [0, size()).
  double rank(Index k) const { return double(k + 1) * eta_; }

 private:
  double eta_;
  double y_max_;
  Index count_;
};

using OrdinalLabel = std::vector<std::uint8_t>;

/// d_k = 1 iff y > r_k.
OrdinalLabel encode(double y, const RankPartition& partition);

enum class DecodeMode {
  Sum,     ///< eta * number of p_k >= xi over all k
  Prefix,  ///< eta * length of the leading run of p_k >= xi
};

double decode(const std::vector<double>& probs, const RankPartition& partition, double xi = 0.5, DecodeMode mode = DecodeMode::Sum);

struct FocalParams {
  double gamma = 2.0;
  std::vector<double> alpha;  ///< one weight per rank, in (0, 1)
};

inline constexpr double kProbClamp = 1e-7;

struct LossWithGrad {
  double loss = 0.0;
  Tensord grad;
};

/// Mean over B x (K-1) of
///   -[alpha_k (1-p)^gamma d log p + (1-alpha_k) p^gamma (1-d) log(1-p)]
/// with p clamped to [1e-7, 1 - 1e-7]. probs and labels are B x (K-1).
LossWithGrad focal_ordinal_loss(const Tensord& probs, const Tensord& labels, const FocalParams& params);

/// alpha_k = clamp(1 - fraction of labels above r_k, 0.05, 0.95).
std::vector<double> rank_frequencies(const std::vector<double>& rain_labels, const RankPartition& partition);

}  // namespace oba

#endif  // OBA_ORDINAL_HPP
