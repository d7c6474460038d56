#include "oba/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace oba {

RankPartition::RankPartition(double eta, double y_max) : eta_(eta), y_max_(y_max) {
  if (!(eta > 0.0)) throw ArgumentError("partition interval eta must be positive");
  if (!(y_max > 0.0)) throw ArgumentError("partition y_max must be positive");
  if (eta > y_max) throw ArgumentError("partition interval eta " + std::to_string(eta) + " exceeds y_max " + std::to_string(y_max));
  count_ = static_cast<Index>(std::ceil(y_max / eta - 1e-9));
}

OrdinalLabel encode(double y, const RankPartition& partition) {
  if (y < 0.0 || y > partition.y_max())
    throw ArgumentError("encode: label " + std::to_string(y) + " outside [0, " + std::to_string(partition.y_max()) + "]");
  OrdinalLabel d(static_cast<std::size_t>(partition.size()));
  for (Index k = 0; k < partition.size(); ++k) d[static_cast<std::size_t>(k)] = y > partition.rank(k) ? 1 : 0;
  return d;
}

double decode(const std::vector<double>& probs, const RankPartition& partition, double xi, DecodeMode mode) {
  if (static_cast<Index>(probs.size()) != partition.size())
    throw ShapeError("decode: got " + std::to_string(probs.size()) + " probabilities for " + std::to_string(partition.size()) + " ranks");
  Index count = 0;
  for (double p : probs) {
    if (p >= xi)
      ++count;
    else if (mode == DecodeMode::Prefix)
      break;
  }
  return partition.eta() * double(count);
}

LossWithGrad focal_ordinal_loss(const Tensord& probs, const Tensord& labels, const FocalParams& params) {
  require_rank(probs.shape(), 2, "focal_ordinal_loss probs");
  if (labels.shape() != probs.shape())
    throw ShapeError("focal_ordinal_loss: labels " + shape_string(labels.shape()) + " vs probs " + shape_string(probs.shape()));
  const Index B = probs.dim(0), K = probs.dim(1);
  if (static_cast<Index>(params.alpha.size()) != K)
    throw ShapeError("focal_ordinal_loss: alpha has " + std::to_string(params.alpha.size()) + " entries for " + std::to_string(K) + " ranks");

  const double g = params.gamma;
  const double n = double(B * K);
  LossWithGrad out{0.0, Tensord(probs.shape())};
  for (Index b = 0; b < B; ++b)
    for (Index k = 0; k < K; ++k) {
      const Index i = b * K + k;
      const double raw = probs[i];
      const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
      const double d = labels[i];
      const double a = params.alpha[static_cast<std::size_t>(k)];
      const double q = 1.0 - p;
      const double pos = a * std::pow(q, g) * d;
      const double neg = (1.0 - a) * std::pow(p, g) * (1.0 - d);
      out.loss -= pos * std::log(p) + neg * std::log(q);
      if (raw < kProbClamp || raw > 1.0 - kProbClamp) continue;
      // d/dp of -(a q^g d log p) and -((1-a) p^g (1-d) log q)
      const double dpos = -a * d * (-g * std::pow(q, g - 1.0) * std::log(p) + std::pow(q, g) / p);
      const double dneg = -(1.0 - a) * (1.0 - d) * (g * std::pow(p, g - 1.0) * std::log(q) - std::pow(p, g) / q);
      out.grad[i] = (g == 0.0 ? -a * d / p + (1.0 - a) * (1.0 - d) / q : dpos + dneg) / n;
    }
  out.loss /= n;
  return out;
}

std::vector<double> rank_frequencies(const std::vector<double>& rain_labels, const RankPartition& partition) {
  if (rain_labels.empty()) throw ArgumentError("rank_frequencies: no rain labels");
  std::vector<double> alpha(static_cast<std::size_t>(partition.size()));
  for (Index k = 0; k < partition.size(); ++k) {
    const double r = partition.rank(k);
    const auto positives = std::count_if(rain_labels.begin(), rain_labels.end(), [r](double y) { return y > r; });
    alpha[static_cast<std::size_t>(k)] = std::clamp(1.0 - double(positives) / double(rain_labels.size()), 0.05, 0.95);
  }
  return alpha;
}

}  // namespace oba
