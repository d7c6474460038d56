#ifndef OBA_EVAL_HPP
#define OBA_EVAL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oba/data.hpp"

namespace oba {

struct ContingencyTable {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

/// A value counts as an event when it is >= delta, for predictions and labels alike.
ContingencyTable contingency(const std::vector<double>& preds, const std::vector<double>& labels, double delta);

/// Threat score TP / (TP + FP + FN); nullopt when the denominator is zero.
std::optional<double> ts_score(const ContingencyTable& t);

double mae(const std::vector<double>& preds, const std::vector<double>& labels);
/// MAE restricted to pairs whose label is > 0.
double mpae(const std::vector<double>& preds, const std::vector<double>& labels);

inline constexpr std::array<double, 3> kTsThresholds = {0.1, 1.0, 10.0};

struct MetricRow {
  std::string method;
  double mae = 0.0;
  double mpae = 0.0;
  std::array<std::optional<double>, 3> ts;
};

MetricRow score(const std::string& method, const std::vector<double>& preds, const std::vector<double>& labels);

/// `method,mae,mpae,ts_0.1,ts_1,ts_10` with six decimals and "-" for undefined scores.
std::string format_report(const std::vector<MetricRow>& rows);

// Baselines --------------------------------------------------------------------

/// Forecast precipitation at the station: the window is station-centred, so
/// this is the centre cell of the raw channel, floored at 0.
double baseline_bi(const GridSample& raw, Index channel, Index height, Index width);
std::vector<double> baseline_bi(const Dataset& raw, Index channel);

struct LinearFit {
  double intercept = 0.0;
  Vector<double> coef;

  double predict(const Vector<double>& features) const { return intercept + coef.dot(features); }
};

/// Per-sample feature vector: spatial mean of every channel.
Vector<double> spatial_means(const GridSample& s, Index channels, Index height, Index width);

/// Ordinary least squares through the normal equations with ridge jitter 1e-8.
LinearFit fit_linear(const Dataset& train);
/// Fits on train and predicts test, clamped at 0.
std::vector<double> baseline_lr(const Dataset& train, const Dataset& test);

}  // namespace oba

#endif  // OBA_EVAL_HPP
