#include "oba/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oba/text.hpp"

namespace oba {

namespace {

void require_pairs(const std::vector<double>& preds, const std::vector<double>& labels, const char* what) {
  if (preds.size() != labels.size())
    throw ShapeError(std::string(what) + ": " + std::to_string(preds.size()) + " predictions vs " + std::to_string(labels.size()) + " labels");
  if (preds.empty()) throw ArgumentError(std::string(what) + ": empty input");
}

}  // namespace

ContingencyTable contingency(const std::vector<double>& preds, const std::vector<double>& labels, double delta) {
  require_pairs(preds, labels, "contingency");
  ContingencyTable t;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] >= delta, o = labels[i] >= delta;
    if (p && o)
      ++t.tp;
    else if (p)
      ++t.fp;
    else if (o)
      ++t.fn;
    else
      ++t.tn;
  }
  return t;
}

std::optional<double> ts_score(const ContingencyTable& t) {
  const auto denom = t.tp + t.fp + t.fn;
  if (denom == 0) return std::nullopt;
  return double(t.tp) / double(denom);
}

double mae(const std::vector<double>& preds, const std::vector<double>& labels) {
  require_pairs(preds, labels, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
  return s / double(preds.size());
}

double mpae(const std::vector<double>& preds, const std::vector<double>& labels) {
  require_pairs(preds, labels, "mpae");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (labels[i] > 0.0) {
      s += std::abs(preds[i] - labels[i]);
      ++n;
    }
  if (n == 0) throw ArgumentError("mpae: every label is dry");
  return s / double(n);
}

MetricRow score(const std::string& method, const std::vector<double>& preds, const std::vector<double>& labels) {
  MetricRow r{method, mae(preds, labels), mpae(preds, labels), {}};
  for (std::size_t i = 0; i < kTsThresholds.size(); ++i) r.ts[i] = ts_score(contingency(preds, labels, kTsThresholds[i]));
  return r;
}

std::string format_report(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "method,mae,mpae,ts_0.1,ts_1,ts_10\n";
  for (const auto& r : rows) {
    out << r.method << ',' << text::fixed6(r.mae) << ',' << text::fixed6(r.mpae);
    for (const auto& t : r.ts) out << ',' << (t ? text::fixed6(*t) : "-");
    out << '\n';
  }
  return out.str();
}

double baseline_bi(const GridSample& raw, Index channel, Index height, Index width) {
  if (channel < 0 || channel >= raw.features.dim(0)) throw ArgumentError("baseline_bi: unknown channel index " + std::to_string(channel));
  return std::max(0.0, raw.features(channel, height / 2, width / 2));
}

std::vector<double> baseline_bi(const Dataset& raw, Index channel) {
  std::vector<double> out;
  out.reserve(raw.samples.size());
  for (const auto& s : raw.samples) out.push_back(baseline_bi(s, channel, raw.height, raw.width));
  return out;
}

Vector<double> spatial_means(const GridSample& s, Index channels, Index height, Index width) {
  return s.features.values().reshaped(height * width, channels).colwise().mean().transpose();
}

LinearFit fit_linear(const Dataset& train) {
  const Index C = train.channels(), n = train.size();
  if (n < C + 1) throw ArgumentError("baseline_lr: need at least " + std::to_string(C + 1) + " training samples, got " + std::to_string(n));
  Eigen::MatrixXd X(n, C + 1);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const auto& s = train.samples[static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    X.row(i).tail(C) = spatial_means(s, C, train.height, train.width).transpose();
    y[i] = s.label;
  }
  Eigen::MatrixXd A = X.transpose() * X;
  A.diagonal().array() += 1e-8;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-15)
    throw NumericError("baseline_lr: normal equations are singular");
  const Eigen::VectorXd beta = ldlt.solve(X.transpose() * y);
  return {beta[0], beta.tail(C)};
}

std::vector<double> baseline_lr(const Dataset& train, const Dataset& test) {
  if (test.channels() != train.channels()) throw ShapeError("baseline_lr: train and test feature counts differ");
  const auto fit = fit_linear(train);
  std::vector<double> out;
  out.reserve(test.samples.size());
  for (const auto& s : test.samples) out.push_back(std::max(0.0, fit.predict(spatial_means(s, test.channels(), test.height, test.width))));
  return out;
}

}  // namespace oba
