#ifndef OBA_MODULES_HPP
#define OBA_MODULES_HPP

// Stateful wrappers around the kernels in layers.hpp. Each module caches
// what its backward pass needs during forward(), accumulates parameter
// gradients in backward(), and exposes its tensors by name for the optimiser
// and for serialisation.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oba/layers.hpp"
#include "oba/optim.hpp"

namespace oba {

using Rng = std::mt19937_64;

/// Visitor over every persisted tensor (parameters and running statistics).
using StateVisitor = std::function<void(const std::string& name, Tensord& tensor)>;

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void fan_in_uniform(Tensord& weights, Index fan_in, Rng& rng);

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, Index in, Index out, Index kernel, Index stride, Rng& rng);

  Tensord forward(const Tensord& x);
  Tensord backward(const Tensord& grad);
  void collect(ParamList& params) { params.push_back(&weight_); params.push_back(&bias_); }
  void visit(const StateVisitor& f) { f(weight_.name, weight_.value); f(bias_.name, bias_.value); }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  Index out_channels() const { return weight_.value.dim(0); }

 private:
  Parameter weight_, bias_;
  ConvGeometry geometry_;
  Tensord input_;
};

class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, Index channels);

  Tensord forward(const Tensord& x, Mode mode);
  Tensord backward(const Tensord& grad);
  void collect(ParamList& params) { params.push_back(&scale_); params.push_back(&shift_); }
  void visit(const StateVisitor& f);

  Parameter& scale() { return scale_; }
  Parameter& shift() { return shift_; }
  const RunningStats<double>& running() const { return running_; }

  /// Until end_recalibration(), train-mode batches replace the running
  /// statistics with their equal-weight average instead of the momentum update.
  void begin_recalibration();
  void end_recalibration() { recalibrating_ = 0; }

 private:
  std::string name_;
  Parameter scale_, shift_;
  RunningStats<double> running_;
  BatchNormCache<double> cache_;
  Index recalibrating_ = 0;  ///< 1 + batches seen while recalibrating, 0 otherwise
};

using BatchNormVisitor = std::function<void(BatchNorm2d&)>;

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Index in, Index out, Rng& rng);

  Tensord forward(const Tensord& x);
  Tensord backward(const Tensord& grad);
  void collect(ParamList& params) { params.push_back(&weight_); params.push_back(&bias_); }
  void visit(const StateVisitor& f) { f(weight_.name, weight_.value); f(bias_.name, bias_.value); }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_, bias_;
  Tensord input_;
};

/// One conv layer of a block: output channels, square kernel, stride.
struct ConvSpec {
  Index out = 0;
  Index kernel = 3;
  Index stride = 1;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// Conv Block: every convolution is followed by batch norm and leaky ReLU (slope 0.01).
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(const std::string& name, Index in, const std::vector<ConvSpec>& specs, Rng& rng);

  Tensord forward(const Tensord& x, Mode mode);
  Tensord backward(const Tensord& grad);
  void collect(ParamList& params);
  void visit(const StateVisitor& f);
  void for_each_batch_norm(const BatchNormVisitor& f) {
    for (auto& u : units_) f(u.bn);
  }
  Index out_channels() const { return out_; }

 private:
  struct Unit {
    Conv2d conv;
    BatchNorm2d bn;
    Tensord pre_activation;
  };
  std::vector<Unit> units_;
  Index out_ = 0;
};

inline constexpr double kLeakySlope = 0.01;

}  // namespace oba

#endif  // OBA_MODULES_HPP
