#ifndef OBA_MODELS_HPP
#define OBA_MODELS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oba/data.hpp"
#include "oba/modules.hpp"
#include "oba/ordinal.hpp"
#include "oba/weights_io.hpp"

namespace oba {

/// Layer widths of every network. `full()` is the reference configuration;
/// `desk()` narrows every layer and strides the first head conv so the whole
/// pipeline trains in minutes on one core.
struct Architecture {
  std::string name;
  std::vector<ConvSpec> eda_stage1;   ///< x -> z
  std::vector<ConvSpec> eda_stage2;   ///< z -> h (last conv has stride 2)
  std::vector<ConvSpec> eda_decoder;  ///< h -> before upsampling
  std::vector<ConvSpec> eda_refine;   ///< after upsampling, followed by a linear 1x1 projection back to C
  std::vector<ConvSpec> subnet_trunk;
  Index subnet_skip = 0;
  std::vector<ConvSpec> selector_trunk;
  Index selector_skip = 0;
  double subnet_dropout = 0.2;

  static Architecture full();
  static Architecture desk();
  static Architecture by_name(const std::string& name);

  Index z_channels() const { return eda_stage1.back().out; }
};

struct NoiseSpec {
  double mu = 0.0;
  double sigma = 0.0;
};

struct EdaOutputs {
  Tensord z;               ///< B x Cz x H x W, pre-perturbation feature map
  Tensord h;               ///< bottleneck
  Tensord reconstruction;  ///< B x C x H x W
};

/// Enhanced denoising autoencoder: noise is added to the input and again to z
/// before the second encoder stage.
class EdaModel {
 public:
  EdaModel(const Architecture& arch, Index channels, Index grid, std::uint64_t seed);

  /// Full pass. `rng` may be null only when noise.sigma == 0.
  EdaOutputs forward(const Tensord& x, Mode bn_mode, NoiseSpec noise, Rng* rng);
  EdaOutputs forward_train(const Tensord& x, Rng& rng, double sigma, double mu = 0.0) { return forward(x, Mode::Train, {mu, sigma}, &rng); }
  /// Noise-free z with frozen batch-norm statistics.
  Tensord encode(const Tensord& x);
  /// Back-propagates d(loss)/d(reconstruction) through the last forward().
  void backward(const Tensord& grad_reconstruction);

  ParamList parameters();
  void visit(const StateVisitor& f);
  void for_each_batch_norm(const BatchNormVisitor& f);
  Index channels() const { return channels_; }
  Index z_channels() const { return stage1_.out_channels(); }

 private:
  Index channels_, grid_;
  ConvBlock stage1_, stage2_, decoder_, refine_;
  Conv2d projection_;
  Shape upsample_input_;
};

/// Conv trunk plus a 1x1 projected skip path, summed, average-pooled,
/// optionally dropped out, and mapped to one output by a fully connected layer.
/// Used as ordinal subnet (sigmoid output), rainfall selector and SRA regressor.
class ResidualHead {
 public:
  ResidualHead(const std::string& name, Index in_channels, const std::vector<ConvSpec>& trunk, Index skip, double dropout, std::uint64_t seed);

  /// B x 1 raw output (logit or regression value). `rng` drives dropout in train mode.
  Tensord forward(const Tensord& x, Mode mode, Rng* rng = nullptr);
  Tensord backward(const Tensord& grad_output);

  ParamList parameters();
  void visit(const StateVisitor& f);
  void for_each_batch_norm(const BatchNormVisitor& f);
  Linear& head() { return fc_; }
  Index in_channels() const { return in_channels_; }

 private:
  Index in_channels_;
  ConvBlock trunk_;
  Conv2d skip_conv_;
  BatchNorm2d skip_bn_;
  Linear fc_;
  double dropout_;
  Tensord mask_;
  Shape pooled_from_;
};

ResidualHead make_subnet(const Architecture& arch, Index k, std::uint64_t seed);
ResidualHead make_selector(const Architecture& arch, Index channels, std::uint64_t seed);
ResidualHead make_sra(const Architecture& arch, std::uint64_t seed);

/// Sigmoid probabilities of a subnet in eval mode, one per batch item.
std::vector<double> subnet_forward(ResidualHead& subnet, const Tensord& z);

/// Mean squared error over all elements and its gradient w.r.t. x_hat.
LossWithGrad reconstruction_loss(const Tensord& x, const Tensord& x_hat);

/// Mean (pred - target)^2 over the batch and its gradient w.r.t. pred.
LossWithGrad least_squares_loss(const Tensord& pred, const std::vector<double>& target);

/// Mean binary cross-entropy on logits and its gradient w.r.t. the logits.
LossWithGrad bce_with_logits(const Tensord& logits, const std::vector<double>& target);

// Training -------------------------------------------------------------------

inline constexpr Index kRecalibrationBatch = 1024;

struct TrainOptions {
  int epochs = 0;
  Index batch = 256;
  AdamOptions adam;
  std::uint64_t seed = 0;
};

using LossCurve = std::vector<double>;

/// Rows `indices` of an N x ... tensor, stacked.
Tensord gather(const Tensord& all, const std::vector<Index>& indices);

/// Replaces every batch-norm running statistic with the average of train-mode
/// batch statistics over `x`, visited in order in chunks of `batch`.
/// `forward(chunk)` must run the model in train mode. Every trainer ends with
/// this pass over its training inputs in chunks of kRecalibrationBatch.
void recalibrate_batch_norm(const std::function<void(const BatchNormVisitor&)>& for_each, const Tensord& x, Index batch,
                            const std::function<void(const Tensord&)>& forward);

/// Adam minimisation of the reconstruction error of noisy forward passes
/// against the clean inputs. Throws NumericError naming the epoch on divergence.
LossCurve train_eda(EdaModel& eda, const Tensord& x, const TrainOptions& opt, NoiseSpec noise);

/// z for every row of x, computed in eval mode in chunks.
Tensord encode_all(EdaModel& eda, const Tensord& x);

struct OrdinalTraining {
  std::vector<ResidualHead> subnets;
  std::vector<LossCurve> curves;
};

/// Trains one subnet per rank against bit d_k of encode(y). Subnet k draws
/// its initialisation and batch order from its own stream, so the result
/// does not depend on `threads` or on training order.
OrdinalTraining train_ordinal(const Tensord& z, const std::vector<double>& y, const RankPartition& partition, const FocalParams& focal,
                              const Architecture& arch, const TrainOptions& opt, int threads = 1);

/// Trains subnet k alone (used by train_ordinal).
LossCurve train_subnet(ResidualHead& subnet, const Tensord& z, const std::vector<double>& bits, double alpha, double gamma, const TrainOptions& opt);

struct SelectorTraining {
  ResidualHead selector;
  LossCurve curve;
  std::optional<double> holdout_accuracy;
};

/// Plain binary cross-entropy on rain (label > 0) vs dry.
SelectorTraining train_selector(const Tensord& x, const std::vector<double>& y, const Architecture& arch, const TrainOptions& opt,
                                const Tensord* holdout_x = nullptr, const std::vector<double>* holdout_y = nullptr);

struct SraTraining {
  ResidualHead sra;
  LossCurve curve;
};

/// Single regression head on z trained with mean squared error.
SraTraining train_sra(const Tensord& z, const std::vector<double>& y, const Architecture& arch, const TrainOptions& opt);

std::vector<double> selector_probabilities(ResidualHead& selector, const Tensord& x);

// Bundle / inference -----------------------------------------------------------

struct ModelBundle {
  Architecture arch;
  Index channels = 0;
  Index grid = 0;
  std::vector<Index> features;  ///< dataset channels consumed, in order
  NormalizationStats stats;
  RankPartition partition{0.5, 25.0};
  double xi = 0.5;
  DecodeMode decode = DecodeMode::Sum;
  NoiseSpec noise;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;
  std::optional<EdaModel> eda;
  std::vector<ResidualHead> subnets;
  std::optional<ResidualHead> selector;
  std::optional<ResidualHead> sra;
  std::string config_echo;

  /// Throws FormatError(MissingComponent) naming the first missing piece OBA prediction needs.
  void require_complete() const;
};

struct BundlePredictions {
  std::vector<double> oba;
  std::vector<double> sra;  ///< empty when the bundle has no SRA head
  std::vector<double> rain_probability;
};

/// Corrected precipitation for a normalized N x C x H x W batch: 0 when the
/// selector says dry, otherwise max(decode(subnet probabilities), eta).
std::vector<double> predict(ModelBundle& bundle, const Tensord& x);
BundlePredictions predict_all(ModelBundle& bundle, const Tensord& x);

/// Raw dataset -> normalized model input using the bundle's feature list and statistics.
Tensord prepare_inputs(const ModelBundle& bundle, const Dataset& raw);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

std::vector<NamedTensor> collect_state(const std::function<void(const StateVisitor&)>& visit);

}  // namespace oba

#endif  // OBA_MODELS_HPP
