#include "oba/modules.hpp"

#include <cmath>

namespace oba {

void fan_in_uniform(Tensord& weights, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index i = 0; i < weights.size(); ++i) weights[i] = dist(rng);
}

Conv2d::Conv2d(const std::string& name, Index in, Index out, Index kernel, Index stride, Rng& rng)
    : weight_(name + ".weight", Tensord({out, in, kernel, kernel})),
      bias_(name + ".bias", Tensord({out})),
      geometry_{stride, kernel / 2} {
  fan_in_uniform(weight_.value, in * kernel * kernel, rng);
}

Tensord Conv2d::forward(const Tensord& x) {
  input_ = x;
  return conv2d(x, weight_.value, bias_.value, geometry_);
}

Tensord Conv2d::backward(const Tensord& grad) {
  auto g = conv2d_backward(input_, weight_.value, grad, geometry_);
  weight_.grad.values() += g.weights.values();
  bias_.grad.values() += g.bias.values();
  return std::move(g.input);
}

BatchNorm2d::BatchNorm2d(const std::string& name, Index channels)
    : name_(name),
      scale_(name + ".scale", Tensord::constant({channels}, 1.0)),
      shift_(name + ".shift", Tensord({channels})),
      running_(RunningStats<double>::identity(channels)) {}

Tensord BatchNorm2d::forward(const Tensord& x, Mode mode) {
  BatchNormOptions opt;
  if (recalibrating_ > 0 && mode == Mode::Train) opt.momentum = 1.0 / double(recalibrating_++);
  return batch_norm(x, scale_.value, shift_.value, running_, mode, opt, &cache_);
}

void BatchNorm2d::begin_recalibration() {
  running_ = RunningStats<double>::identity(scale_.value.size());
  recalibrating_ = 1;
}

Tensord BatchNorm2d::backward(const Tensord& grad) {
  auto g = batch_norm_backward(cache_, scale_.value, grad);
  scale_.grad.values() += g.scale.values();
  shift_.grad.values() += g.shift.values();
  return std::move(g.input);
}

void BatchNorm2d::visit(const StateVisitor& f) {
  f(scale_.name, scale_.value);
  f(shift_.name, shift_.value);
  Tensord mean({running_.mean.size()}, running_.mean);
  Tensord var({running_.var.size()}, running_.var);
  f(name_ + ".running_mean", mean);
  f(name_ + ".running_var", var);
  running_.mean = mean.values();
  running_.var = var.values();
  running_.initialized = true;
}

Linear::Linear(const std::string& name, Index in, Index out, Rng& rng)
    : weight_(name + ".weight", Tensord({out, in})), bias_(name + ".bias", Tensord({out})) {
  fan_in_uniform(weight_.value, in, rng);
}

Tensord Linear::forward(const Tensord& x) {
  input_ = x;
  return fully_connected(x, weight_.value, bias_.value);
}

Tensord Linear::backward(const Tensord& grad) {
  auto g = fully_connected_backward(input_, weight_.value, grad);
  weight_.grad.values() += g.weights.values();
  bias_.grad.values() += g.bias.values();
  return std::move(g.input);
}

ConvBlock::ConvBlock(const std::string& name, Index in, const std::vector<ConvSpec>& specs, Rng& rng) {
  Index channels = in;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::string prefix = name + "." + std::to_string(i);
    units_.push_back({Conv2d(prefix + ".conv", channels, s.out, s.kernel, s.stride, rng), BatchNorm2d(prefix + ".bn", s.out), {}});
    channels = s.out;
  }
  out_ = channels;
}

Tensord ConvBlock::forward(const Tensord& x, Mode mode) {
  Tensord h = x;
  for (auto& u : units_) {
    u.pre_activation = u.bn.forward(u.conv.forward(h), mode);
    h = leaky_relu(u.pre_activation, kLeakySlope);
  }
  return h;
}

Tensord ConvBlock::backward(const Tensord& grad) {
  Tensord g = grad;
  for (auto it = units_.rbegin(); it != units_.rend(); ++it) {
    g = leaky_relu_backward(it->pre_activation, g, kLeakySlope);
    g = it->conv.backward(it->bn.backward(g));
  }
  return g;
}

void ConvBlock::collect(ParamList& params) {
  for (auto& u : units_) {
    u.conv.collect(params);
    u.bn.collect(params);
  }
}

void ConvBlock::visit(const StateVisitor& f) {
  for (auto& u : units_) {
    u.conv.visit(f);
    u.bn.visit(f);
  }
}

}  // namespace oba
