#include "oba/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "oba/random.hpp"

namespace oba {

Architecture Architecture::full() {
  Architecture a;
  a.name = "full";
  a.eda_stage1 = {{32, 1, 1}, {32, 3, 1}};
  a.eda_stage2 = {{64, 3, 1}, {64, 3, 2}};
  a.eda_decoder = {{64, 3, 1}};
  a.eda_refine = {{32, 3, 1}};
  a.subnet_trunk = {{128, 3, 1}, {128, 3, 1}, {32, 1, 1}, {32, 1, 1}};
  a.subnet_skip = 32;
  a.selector_trunk = {{64, 3, 1}, {64, 3, 1}, {128, 3, 1}, {128, 3, 1}};
  a.selector_skip = 128;
  return a;
}

Architecture Architecture::desk() {
  Architecture a;
  a.name = "desk";
  a.eda_stage1 = {{8, 1, 1}, {8, 3, 1}};
  a.eda_stage2 = {{16, 3, 1}, {16, 3, 2}};
  a.eda_decoder = {{16, 3, 1}};
  a.eda_refine = {{8, 3, 1}};
  a.subnet_trunk = {{8, 3, 2}, {8, 3, 1}, {8, 1, 1}, {8, 1, 1}};
  a.subnet_skip = 8;
  a.selector_trunk = {{8, 3, 2}, {8, 3, 1}, {16, 3, 1}, {16, 3, 1}};
  a.selector_skip = 16;
  return a;
}

Architecture Architecture::by_name(const std::string& name) {
  if (name == "full") return full();
  if (name == "desk") return desk();
  throw ArgumentError("unknown architecture '" + name + "' (expected full or desk)");
}

// EDA ------------------------------------------------------------------------

EdaModel::EdaModel(const Architecture& arch, Index channels, Index grid, std::uint64_t seed) : channels_(channels), grid_(grid) {
  Rng rng(seed);
  stage1_ = ConvBlock("eda.stage1", channels, arch.eda_stage1, rng);
  stage2_ = ConvBlock("eda.stage2", stage1_.out_channels(), arch.eda_stage2, rng);
  decoder_ = ConvBlock("eda.decoder", stage2_.out_channels(), arch.eda_decoder, rng);
  refine_ = ConvBlock("eda.refine", decoder_.out_channels(), arch.eda_refine, rng);
  projection_ = Conv2d("eda.projection", refine_.out_channels(), channels, 1, 1, rng);
}

namespace {

Tensord add_noise(const Tensord& x, NoiseSpec noise, Rng* rng) {
  if (noise.sigma == 0.0 && noise.mu == 0.0) return x;
  Tensord out = x;
  if (noise.sigma == 0.0) {
    out.values().array() += noise.mu;
    return out;
  }
  if (!rng) throw ArgumentError("EDA forward: noise requested without a random generator");
  std::normal_distribution<double> normal(noise.mu, noise.sigma);
  for (Index i = 0; i < out.size(); ++i) out[i] += normal(*rng);
  return out;
}

}  // namespace

EdaOutputs EdaModel::forward(const Tensord& x, Mode bn_mode, NoiseSpec noise, Rng* rng) {
  require_rank(x.shape(), 4, "EDA input");
  if (x.dim(1) != channels_) throw ShapeError("EDA: input has " + std::to_string(x.dim(1)) + " channels, model expects " + std::to_string(channels_));
  EdaOutputs out;
  out.z = stage1_.forward(add_noise(x, noise, rng), bn_mode);
  out.h = stage2_.forward(add_noise(out.z, noise, rng), bn_mode);
  Tensord d = decoder_.forward(out.h, bn_mode);
  upsample_input_ = d.shape();
  d = bilinear_upsample(d, x.dim(2), x.dim(3));
  out.reconstruction = projection_.forward(refine_.forward(d, bn_mode));
  return out;
}

Tensord EdaModel::encode(const Tensord& x) {
  require_rank(x.shape(), 4, "EDA input");
  if (x.dim(1) != channels_) throw ShapeError("EDA: input has " + std::to_string(x.dim(1)) + " channels, model expects " + std::to_string(channels_));
  return stage1_.forward(x, Mode::Eval);
}

void EdaModel::backward(const Tensord& grad_reconstruction) {
  Tensord g = refine_.backward(projection_.backward(grad_reconstruction));
  g = bilinear_upsample_backward(upsample_input_, g);
  g = stage2_.backward(decoder_.backward(g));
  stage1_.backward(g);
}

ParamList EdaModel::parameters() {
  ParamList p;
  stage1_.collect(p);
  stage2_.collect(p);
  decoder_.collect(p);
  refine_.collect(p);
  projection_.collect(p);
  return p;
}

void EdaModel::for_each_batch_norm(const BatchNormVisitor& f) {
  stage1_.for_each_batch_norm(f);
  stage2_.for_each_batch_norm(f);
  decoder_.for_each_batch_norm(f);
  refine_.for_each_batch_norm(f);
}

void EdaModel::visit(const StateVisitor& f) {
  stage1_.visit(f);
  stage2_.visit(f);
  decoder_.visit(f);
  refine_.visit(f);
  projection_.visit(f);
}

// Residual head ----------------------------------------------------------------

ResidualHead::ResidualHead(const std::string& name, Index in_channels, const std::vector<ConvSpec>& trunk, Index skip, double dropout,
                           std::uint64_t seed)
    : in_channels_(in_channels), dropout_(dropout) {
  Rng rng(seed);
  trunk_ = ConvBlock(name + ".trunk", in_channels, trunk, rng);
  if (trunk_.out_channels() != skip) throw ArgumentError(name + ": trunk output width must equal the skip projection width");
  Index stride = 1;
  for (const auto& spec : trunk) stride *= spec.stride;
  skip_conv_ = Conv2d(name + ".skip.conv", in_channels, skip, 1, stride, rng);
  skip_bn_ = BatchNorm2d(name + ".skip.bn", skip);
  fc_ = Linear(name + ".fc", skip, 1, rng);
}

Tensord ResidualHead::forward(const Tensord& x, Mode mode, Rng* rng) {
  require_rank(x.shape(), 4, "head input");
  if (x.dim(1) != in_channels_)
    throw ShapeError("head: input has " + std::to_string(x.dim(1)) + " channels, expected " + std::to_string(in_channels_));
  Tensord sum = trunk_.forward(x, mode);
  sum.values() += skip_bn_.forward(skip_conv_.forward(x), mode).values();
  pooled_from_ = sum.shape();
  Tensord pooled = global_avg_pool(sum);
  if (mode == Mode::Train && dropout_ > 0.0) {
    if (!rng) throw ArgumentError("head: dropout in train mode needs a random generator");
    auto r = dropout(pooled, dropout_, mode, *rng);
    pooled = std::move(r.output);
    mask_ = std::move(r.mask);
  } else {
    mask_ = Tensord::constant(pooled.shape(), 1.0);
  }
  return fc_.forward(pooled);
}

Tensord ResidualHead::backward(const Tensord& grad_output) {
  Tensord g = dropout_backward(mask_, fc_.backward(grad_output));
  g = global_avg_pool_backward(pooled_from_, g);
  Tensord gx = trunk_.backward(g);
  gx.values() += skip_conv_.backward(skip_bn_.backward(g)).values();
  return gx;
}

ParamList ResidualHead::parameters() {
  ParamList p;
  trunk_.collect(p);
  skip_conv_.collect(p);
  skip_bn_.collect(p);
  fc_.collect(p);
  return p;
}

void ResidualHead::for_each_batch_norm(const BatchNormVisitor& f) {
  trunk_.for_each_batch_norm(f);
  f(skip_bn_);
}

void ResidualHead::visit(const StateVisitor& f) {
  trunk_.visit(f);
  skip_conv_.visit(f);
  skip_bn_.visit(f);
  fc_.visit(f);
}

ResidualHead make_subnet(const Architecture& arch, Index k, std::uint64_t seed) {
  return ResidualHead("subnet", arch.z_channels(), arch.subnet_trunk, arch.subnet_skip, arch.subnet_dropout,
                      stream_seed(seed, 2 * static_cast<std::uint64_t>(k)));
}

ResidualHead make_selector(const Architecture& arch, Index channels, std::uint64_t seed) {
  return ResidualHead("selector", channels, arch.selector_trunk, arch.selector_skip, 0.0, seed);
}

ResidualHead make_sra(const Architecture& arch, std::uint64_t seed) {
  return ResidualHead("sra", arch.z_channels(), arch.subnet_trunk, arch.subnet_skip, arch.subnet_dropout, seed);
}

std::vector<double> subnet_forward(ResidualHead& subnet, const Tensord& z) {
  const Tensord logits = subnet.forward(z, Mode::Eval);
  std::vector<double> p(static_cast<std::size_t>(logits.size()));
  for (Index i = 0; i < logits.size(); ++i) p[static_cast<std::size_t>(i)] = sigmoid(logits[i]);
  return p;
}

// Losses -----------------------------------------------------------------------

LossWithGrad reconstruction_loss(const Tensord& x, const Tensord& x_hat) {
  if (x.shape() != x_hat.shape())
    throw ShapeError("reconstruction_loss: " + shape_string(x.shape()) + " vs " + shape_string(x_hat.shape()));
  const double n = double(x.size());
  LossWithGrad out{0.0, Tensord(x.shape())};
  out.grad.values() = x_hat.values() - x.values();
  out.loss = out.grad.values().squaredNorm() / n;
  out.grad.values() *= 2.0 / n;
  return out;
}

LossWithGrad least_squares_loss(const Tensord& pred, const std::vector<double>& target) {
  if (pred.size() != static_cast<Index>(target.size())) throw ShapeError("least_squares_loss: prediction/target length mismatch");
  const double n = double(target.size());
  LossWithGrad out{0.0, Tensord(pred.shape())};
  for (Index i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[static_cast<std::size_t>(i)];
    out.loss += r * r / n;
    out.grad[i] = 2.0 * r / n;
  }
  return out;
}

LossWithGrad bce_with_logits(const Tensord& logits, const std::vector<double>& target) {
  if (logits.size() != static_cast<Index>(target.size())) throw ShapeError("bce_with_logits: logit/target length mismatch");
  const double n = double(target.size());
  LossWithGrad out{0.0, Tensord(logits.shape())};
  for (Index i = 0; i < logits.size(); ++i) {
    const double s = logits[i], t = target[static_cast<std::size_t>(i)];
    // softplus(s) - t * s
    out.loss += (std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))) - t * s) / n;
    out.grad[i] = (sigmoid(s) - t) / n;
  }
  return out;
}

// Training ---------------------------------------------------------------------

Tensord gather(const Tensord& all, const std::vector<Index>& indices) {
  Shape shape = all.shape();
  const Index per = all.size() / std::max<Index>(shape[0], 1);
  shape[0] = static_cast<Index>(indices.size());
  Tensord out(shape);
  for (std::size_t k = 0; k < indices.size(); ++k) out.values().segment(static_cast<Index>(k) * per, per) = all.values().segment(indices[k] * per, per);
  return out;
}

namespace {

std::vector<double> gather_values(const std::vector<double>& v, const std::vector<Index>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

/// Shuffled mini-batch epochs. `step(indices)` runs one optimisation step and
/// returns the batch loss; the curve holds the sample-weighted mean per epoch.
template <typename Step>
LossCurve run_epochs(Index n, const TrainOptions& opt, Rng& rng, const char* what, Step&& step) {
  if (opt.batch < 1) throw ArgumentError(std::string(what) + ": batch size must be positive");
  LossCurve curve;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double total = 0.0;
    for (Index start = 0; start < n; start += opt.batch) {
      const Index len = std::min(opt.batch, n - start);
      std::vector<Index> batch(order.begin() + start, order.begin() + start + len);
      const double loss = step(batch);
      if (!std::isfinite(loss)) throw NumericError(std::string(what) + " diverged (non-finite loss) at epoch " + std::to_string(epoch));
      total += loss * double(len);
    }
    curve.push_back(total / double(std::max<Index>(n, 1)));
  }
  return curve;
}

}  // namespace

void recalibrate_batch_norm(const std::function<void(const BatchNormVisitor&)>& for_each, const Tensord& x, Index batch,
                            const std::function<void(const Tensord&)>& forward) {
  if (batch < 1) throw ArgumentError("recalibrate_batch_norm: batch size must be positive");
  for_each([](BatchNorm2d& bn) { bn.begin_recalibration(); });
  for (Index start = 0; start < x.dim(0); start += batch) {
    std::vector<Index> idx(static_cast<std::size_t>(std::min(batch, x.dim(0) - start)));
    std::iota(idx.begin(), idx.end(), start);
    forward(gather(x, idx));
  }
  for_each([](BatchNorm2d& bn) { bn.end_recalibration(); });
}

namespace {

void recalibrate_heads(ResidualHead& head, const Tensord& x, const TrainOptions& opt, Rng& rng) {
  if (opt.epochs > 0)
    recalibrate_batch_norm([&](const BatchNormVisitor& f) { head.for_each_batch_norm(f); }, x, kRecalibrationBatch,
                           [&](const Tensord& xb) { head.forward(xb, Mode::Train, &rng); });
}

}  // namespace

LossCurve train_eda(EdaModel& eda, const Tensord& x, const TrainOptions& opt, NoiseSpec noise) {
  if (x.rank() != 4 || x.dim(0) == 0) throw ArgumentError("train_eda: no training data");
  if (noise.sigma < 0.0) throw ArgumentError("train_eda: sigma must be non-negative");
  Rng rng(opt.seed);
  AdamState adam(opt.adam);
  auto params = eda.parameters();
  auto curve = run_epochs(x.dim(0), opt, rng, "EDA training", [&](const std::vector<Index>& batch) {
    const Tensord xb = gather(x, batch);
    zero_grads(params);
    const auto out = eda.forward(xb, Mode::Train, noise, &rng);
    const auto loss = reconstruction_loss(xb, out.reconstruction);
    eda.backward(loss.grad);
    adam_step(params, adam);
    return loss.loss;
  });
  if (opt.epochs > 0)
    recalibrate_batch_norm([&](const BatchNormVisitor& f) { eda.for_each_batch_norm(f); }, x, kRecalibrationBatch,
                           [&](const Tensord& xb) { eda.forward(xb, Mode::Train, {}, nullptr); });
  return curve;
}

Tensord encode_all(EdaModel& eda, const Tensord& x) {
  const Index n = x.dim(0);
  constexpr Index chunk = 256;
  Tensord z;
  for (Index start = 0; start < n; start += chunk) {
    std::vector<Index> idx(static_cast<std::size_t>(std::min(chunk, n - start)));
    std::iota(idx.begin(), idx.end(), start);
    const Tensord zc = eda.encode(gather(x, idx));
    if (start == 0) {
      Shape shape = zc.shape();
      shape[0] = n;
      z = Tensord(shape);
    }
    z.values().segment(start * (zc.size() / zc.dim(0)), zc.size()) = zc.values();
  }
  return z;
}

LossCurve train_subnet(ResidualHead& subnet, const Tensord& z, const std::vector<double>& bits, double alpha, double gamma, const TrainOptions& opt) {
  Rng rng(opt.seed);
  AdamState adam(opt.adam);
  auto params = subnet.parameters();
  const FocalParams focal{gamma, {alpha}};
  auto curve = run_epochs(z.dim(0), opt, rng, "ordinal subnet training", [&](const std::vector<Index>& batch) {
    const Tensord zb = gather(z, batch);
    zero_grads(params);
    const Tensord logits = subnet.forward(zb, Mode::Train, &rng);
    Tensord probs(logits.shape()), labels(logits.shape());
    for (Index i = 0; i < logits.size(); ++i) {
      probs[i] = sigmoid(logits[i]);
      labels[i] = bits[static_cast<std::size_t>(batch[static_cast<std::size_t>(i)])];
    }
    auto loss = focal_ordinal_loss(probs, labels, focal);
    for (Index i = 0; i < probs.size(); ++i) loss.grad[i] *= probs[i] * (1.0 - probs[i]);
    subnet.backward(loss.grad);
    adam_step(params, adam);
    return loss.loss;
  });
  recalibrate_heads(subnet, z, opt, rng);
  return curve;
}

OrdinalTraining train_ordinal(const Tensord& z, const std::vector<double>& y, const RankPartition& partition, const FocalParams& focal,
                              const Architecture& arch, const TrainOptions& opt, int threads) {
  if (z.rank() != 4 || z.dim(0) == 0 || z.dim(0) != static_cast<Index>(y.size())) throw ArgumentError("train_ordinal: empty or mismatched data");
  if (z.dim(1) != arch.z_channels()) throw ShapeError("train_ordinal: z has " + std::to_string(z.dim(1)) + " channels, subnets expect " + std::to_string(arch.z_channels()));
  const Index K = partition.size();
  if (static_cast<Index>(focal.alpha.size()) != K) throw ShapeError("train_ordinal: alpha length does not match the partition");
  for (double v : y)
    if (v > partition.y_max()) throw ArgumentError("train_ordinal: label " + std::to_string(v) + " exceeds partition y_max");

  OrdinalTraining out;
  out.subnets.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) out.subnets.push_back(make_subnet(arch, k, opt.seed));
  out.curves.resize(static_cast<std::size_t>(K));

  auto train_one = [&](Index k) {
    std::vector<double> bits(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) bits[i] = y[i] > partition.rank(k) ? 1.0 : 0.0;
    TrainOptions sub = opt;
    sub.seed = stream_seed(opt.seed, 2 * static_cast<std::uint64_t>(k) + 1);
    out.curves[static_cast<std::size_t>(k)] =
        train_subnet(out.subnets[static_cast<std::size_t>(k)], z, bits, focal.alpha[static_cast<std::size_t>(k)], focal.gamma, sub);
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(K)));
  if (workers == 1) {
    for (Index k = 0; k < K; ++k) train_one(k);
    return out;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (Index k = next++; k < K; k = next++) {
        try {
          train_one(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> selector_probabilities(ResidualHead& selector, const Tensord& x) {
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(x.dim(0)));
  constexpr Index chunk = 256;
  for (Index start = 0; start < x.dim(0); start += chunk) {
    std::vector<Index> idx(static_cast<std::size_t>(std::min(chunk, x.dim(0) - start)));
    std::iota(idx.begin(), idx.end(), start);
    const Tensord logits = selector.forward(gather(x, idx), Mode::Eval);
    for (Index i = 0; i < logits.size(); ++i) p.push_back(sigmoid(logits[i]));
  }
  return p;
}

SelectorTraining train_selector(const Tensord& x, const std::vector<double>& y, const Architecture& arch, const TrainOptions& opt,
                                const Tensord* holdout_x, const std::vector<double>* holdout_y) {
  if (x.rank() != 4 || x.dim(0) != static_cast<Index>(y.size())) throw ArgumentError("train_selector: mismatched data");
  std::vector<double> rain(y.size());
  std::transform(y.begin(), y.end(), rain.begin(), [](double v) { return v > 0.0 ? 1.0 : 0.0; });
  const auto n_rain = std::count(rain.begin(), rain.end(), 1.0);
  if (n_rain == 0 || n_rain == static_cast<std::ptrdiff_t>(rain.size()))
    throw ArgumentError("train_selector: training data must contain both rain and dry samples");

  SelectorTraining out{make_selector(arch, x.dim(1), stream_seed(opt.seed, 0)), {}, std::nullopt};
  Rng rng(stream_seed(opt.seed, 1));
  AdamState adam(opt.adam);
  auto params = out.selector.parameters();
  out.curve = run_epochs(x.dim(0), opt, rng, "selector training", [&](const std::vector<Index>& batch) {
    zero_grads(params);
    const Tensord logits = out.selector.forward(gather(x, batch), Mode::Train, &rng);
    const auto loss = bce_with_logits(logits, gather_values(rain, batch));
    out.selector.backward(loss.grad);
    adam_step(params, adam);
    return loss.loss;
  });
  recalibrate_heads(out.selector, x, opt, rng);
  if (holdout_x && holdout_y && !holdout_y->empty()) {
    const auto p = selector_probabilities(out.selector, *holdout_x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.size(); ++i) correct += (p[i] >= 0.5) == ((*holdout_y)[i] > 0.0);
    out.holdout_accuracy = double(correct) / double(p.size());
  }
  return out;
}

SraTraining train_sra(const Tensord& z, const std::vector<double>& y, const Architecture& arch, const TrainOptions& opt) {
  if (z.rank() != 4 || z.dim(0) == 0 || z.dim(0) != static_cast<Index>(y.size())) throw ArgumentError("train_sra: empty or mismatched data");
  SraTraining out{make_sra(arch, stream_seed(opt.seed, 0)), {}};
  Rng rng(stream_seed(opt.seed, 1));
  AdamState adam(opt.adam);
  auto params = out.sra.parameters();
  out.curve = run_epochs(z.dim(0), opt, rng, "SRA training", [&](const std::vector<Index>& batch) {
    zero_grads(params);
    const Tensord pred = out.sra.forward(gather(z, batch), Mode::Train, &rng);
    const auto loss = least_squares_loss(pred, gather_values(y, batch));
    out.sra.backward(loss.grad);
    adam_step(params, adam);
    return loss.loss;
  });
  recalibrate_heads(out.sra, z, opt, rng);
  return out;
}

// Inference --------------------------------------------------------------------

void ModelBundle::require_complete() const {
  if (!eda) throw FormatError(FormatError::Kind::MissingComponent, "missing component: eda");
  if (!selector) throw FormatError(FormatError::Kind::MissingComponent, "missing component: selector");
  if (static_cast<Index>(subnets.size()) != partition.size())
    throw FormatError(FormatError::Kind::MissingComponent, "missing component: subnets (have " + std::to_string(subnets.size()) + " of " +
                                                                std::to_string(partition.size()) + ")");
}

BundlePredictions predict_all(ModelBundle& bundle, const Tensord& x) {
  bundle.require_complete();
  require_rank(x.shape(), 4, "predict input");
  const Index n = x.dim(0);
  BundlePredictions out;
  out.rain_probability = selector_probabilities(*bundle.selector, x);
  out.oba.assign(static_cast<std::size_t>(n), 0.0);
  if (bundle.sra) out.sra.assign(static_cast<std::size_t>(n), 0.0);

  std::vector<Index> wet;
  for (Index i = 0; i < n; ++i)
    if (out.rain_probability[static_cast<std::size_t>(i)] >= 0.5) wet.push_back(i);

  constexpr std::size_t chunk = 256;
  const auto K = static_cast<std::size_t>(bundle.partition.size());
  for (std::size_t start = 0; start < wet.size(); start += chunk) {
    const std::vector<Index> idx(wet.begin() + static_cast<std::ptrdiff_t>(start), wet.begin() + static_cast<std::ptrdiff_t>(std::min(wet.size(), start + chunk)));
    const Tensord z = bundle.eda->encode(gather(x, idx));
    std::vector<std::vector<double>> probs(idx.size(), std::vector<double>(K));
    for (std::size_t k = 0; k < K; ++k) {
      const auto p = subnet_forward(bundle.subnets[k], z);
      for (std::size_t i = 0; i < idx.size(); ++i) probs[i][k] = p[i];
    }
    for (std::size_t i = 0; i < idx.size(); ++i)
      out.oba[static_cast<std::size_t>(idx[i])] = std::max(decode(probs[i], bundle.partition, bundle.xi, bundle.decode), bundle.partition.eta());
    if (bundle.sra) {
      const Tensord r = bundle.sra->forward(z, Mode::Eval);
      for (std::size_t i = 0; i < idx.size(); ++i) out.sra[static_cast<std::size_t>(idx[i])] = std::max(r[static_cast<Index>(i)], 0.0);
    }
  }
  return out;
}

std::vector<double> predict(ModelBundle& bundle, const Tensord& x) { return predict_all(bundle, x).oba; }

Tensord prepare_inputs(const ModelBundle& bundle, const Dataset& raw) {
  if (raw.height != bundle.grid || raw.width != bundle.grid)
    throw ShapeError("dataset grid " + std::to_string(raw.height) + "x" + std::to_string(raw.width) + " does not match model grid " + std::to_string(bundle.grid));
  for (Index c : bundle.features)
    if (c >= raw.channels()) throw ShapeError("dataset has " + std::to_string(raw.channels()) + " features, model uses index " + std::to_string(c));
  return apply_stats(select_features(raw, bundle.features), bundle.stats).stack();
}

}  // namespace oba
