#ifndef OBA_PIPELINE_HPP
#define OBA_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oba/config.hpp"
#include "oba/eval.hpp"
#include "oba/models.hpp"

namespace oba {

enum class Stage { Eda, Ordinal, Selector, Sra, All };

Stage parse_stage(const std::string& name);

struct TrainResult {
  ModelBundle bundle;
  std::map<std::string, LossCurve> curves;  ///< "eda", "subnet_1".., "selector", "sra"
  std::optional<double> selector_accuracy;  ///< on the held-out split
};

struct TrainRequest {
  Stage stage = Stage::All;
  std::uint64_t seed = 0;
  /// Channels to use; screened on the training split when absent.
  std::optional<std::vector<Index>> features;
  /// Bundle from an earlier stage; required for ordinal/sra when not training all.
  const ModelBundle* base = nullptr;
  bool with_sra = true;
  bool with_selector = true;
};

/// Splits by seed, screens and normalizes on the training split, then trains
/// the requested components. Ordinal subnets and SRA see rainy samples only.
TrainResult train_pipeline(const Dataset& raw, const RunConfig& cfg, const TrainRequest& request);

struct Evaluation {
  std::vector<MetricRow> rows;  ///< BI, LR, SRA (when present), OBA
  std::vector<Index> test_indices;
  BundlePredictions predictions;
  std::vector<double> bi;
  std::vector<double> labels;
};

/// Scores the bundle on its own test split of `raw`.
Evaluation evaluate_bundle(const Dataset& raw, ModelBundle& bundle, const RunConfig& cfg);

struct AblationPoint {
  std::string param;
  double value = 0.0;
  MetricRow metrics;  ///< OBA on the test split
};

/// Retrains the full pipeline for every value of `param` ("sigma" or "eta")
/// with identical seeds. The selector sees neither parameter, so it is
/// trained once and shared by every point.
std::vector<AblationPoint> ablate(const Dataset& raw, const RunConfig& cfg, std::uint64_t seed, const std::string& param,
                                  const std::vector<double>& values);

std::string format_ablation(const std::vector<AblationPoint>& points);

std::string format_curves(const std::map<std::string, LossCurve>& curves);

}  // namespace oba

#endif  // OBA_PIPELINE_HPP
