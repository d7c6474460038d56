#ifndef OBA_LAYERS_HPP
#define OBA_LAYERS_HPP

// Stateless forward/backward kernels for the layer set used by the models.
// All image tensors are B x C x H x W; rank-3 C x H x W inputs are accepted
// where noted and treated as a batch of one.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oba/tensor.hpp"

namespace oba {

enum class Mode { Train, Eval };

struct ConvGeometry {
  Index stride = 1;
  Index padding = 0;
};

inline Index conv_out_dim(Index in, Index kernel, const ConvGeometry& g) {
  return (in + 2 * g.padding - kernel) / g.stride + 1;
}

namespace detail {

// Columns of at most this many output pixels are materialised per GEMM.
inline constexpr Index kIm2ColColumns = 1 << 14;

/// Rank-4 view of `x`: `x` itself, or a reshaped copy held in `storage`.
template <typename Scalar>
const Tensor<Scalar>& as_batch(const Tensor<Scalar>& x, Tensor<Scalar>& storage, const char* what) {
  if (x.rank() == 3) {
    storage = x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
    return storage;
  }
  require_rank(x.shape(), 4, what);
  return x;
}

struct ConvDims {
  Index batch, in_c, in_h, in_w, out_c, kernel, out_h, out_w;
  Index patch() const { return in_c * kernel * kernel; }
  Index pixels() const { return out_h * out_w; }
};

template <typename Scalar>
ConvDims conv_dims(const Shape& in, const Shape& w, const ConvGeometry& g) {
  require_rank(w, 4, "conv2d weights");
  if (w[2] != w[3]) throw ShapeError("conv2d: kernel must be square, got " + shape_string(w));
  if (in[1] != w[1])
    throw ShapeError("conv2d: input has " + std::to_string(in[1]) + " channels but weights expect " + std::to_string(w[1]) +
                     " (weights " + shape_string(w) + ")");
  if (g.stride < 1 || g.padding < 0) throw ArgumentError("conv2d: stride must be >= 1 and padding >= 0");
  ConvDims d{in[0], in[1], in[2], in[3], w[0], w[2], 0, 0};
  d.out_h = conv_out_dim(d.in_h, d.kernel, g);
  d.out_w = conv_out_dim(d.in_w, d.kernel, g);
  if (d.out_h < 1 || d.out_w < 1) throw ShapeError("conv2d: kernel larger than padded input");
  return d;
}

// Output columns [lo, hi) whose input column ow * stride - padding + kj lies inside [0, in).
inline std::pair<Index, Index> valid_range(Index in, Index out, Index k, const ConvGeometry& g) {
  Index lo = 0;
  while (lo < out && lo * g.stride - g.padding + k < 0) ++lo;
  Index hi = out;
  while (hi > lo && (hi - 1) * g.stride - g.padding + k >= in) --hi;
  return {lo, hi};
}

template <typename Scalar>
void im2col(const Scalar* input, const ConvDims& d, const ConvGeometry& g, Index b0, Index nb, RowMatrixMap<Scalar>& cols) {
  const Index P = d.pixels();
  for (Index c = 0; c < d.in_c; ++c)
    for (Index ki = 0; ki < d.kernel; ++ki)
      for (Index kj = 0; kj < d.kernel; ++kj) {
        Scalar* row = cols.row((c * d.kernel + ki) * d.kernel + kj).data();
        const auto [lo, hi] = valid_range(d.in_w, d.out_w, kj, g);
        for (Index b = 0; b < nb; ++b) {
          const Scalar* plane = input + ((b0 + b) * d.in_c + c) * d.in_h * d.in_w;
          Scalar* dst = row + b * P;
          for (Index oh = 0; oh < d.out_h; ++oh) {
            Scalar* out = dst + oh * d.out_w;
            const Index ih = oh * g.stride - g.padding + ki;
            if (ih < 0 || ih >= d.in_h) {
              std::fill(out, out + d.out_w, Scalar(0));
              continue;
            }
            std::fill(out, out + lo, Scalar(0));
            const Scalar* src = plane + ih * d.in_w - g.padding + kj;
            if (g.stride == 1)
              std::copy(src + lo, src + hi, out + lo);
            else
              for (Index ow = lo; ow < hi; ++ow) out[ow] = src[ow * g.stride];
            std::fill(out + hi, out + d.out_w, Scalar(0));
          }
        }
      }
}

template <typename Scalar>
void col2im(const RowMatrixMap<Scalar>& cols, const ConvDims& d, const ConvGeometry& g, Index b0, Index nb, Scalar* grad_input) {
  const Index P = d.pixels();
  for (Index c = 0; c < d.in_c; ++c)
    for (Index ki = 0; ki < d.kernel; ++ki)
      for (Index kj = 0; kj < d.kernel; ++kj) {
        const Scalar* row = cols.row((c * d.kernel + ki) * d.kernel + kj).data();
        const auto [lo, hi] = valid_range(d.in_w, d.out_w, kj, g);
        for (Index b = 0; b < nb; ++b) {
          Scalar* plane = grad_input + ((b0 + b) * d.in_c + c) * d.in_h * d.in_w;
          const Scalar* src = row + b * P;
          for (Index oh = 0; oh < d.out_h; ++oh) {
            const Index ih = oh * g.stride - g.padding + ki;
            if (ih < 0 || ih >= d.in_h) continue;
            Scalar* dst = plane + ih * d.in_w - g.padding + kj;
            const Scalar* s = src + oh * d.out_w;
            if (g.stride == 1)
              for (Index ow = lo; ow < hi; ++ow) dst[ow] += s[ow];
            else
              for (Index ow = lo; ow < hi; ++ow) dst[ow * g.stride] += s[ow];
          }
        }
      }
}

/// Per-thread growable buffer viewed as a rows x cols matrix; `slot` separates
/// buffers that are alive at the same time.
template <typename Scalar>
RowMatrixMap<Scalar> scratch(int slot, Index rows, Index cols) {
  thread_local std::vector<Scalar, Eigen::aligned_allocator<Scalar>> buffers[3];
  auto& buf = buffers[slot];
  if (static_cast<Index>(buf.size()) < rows * cols) buf.resize(static_cast<std::size_t>(rows * cols));
  return RowMatrixMap<Scalar>(buf.data(), rows, cols);
}

inline Index items_per_chunk(Index pixels) { return std::max<Index>(1, kIm2ColColumns / std::max<Index>(1, pixels)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// conv2d: cross-correlation, weights C_out x C_in x k x k.

template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weights, const Tensor<Scalar>& bias, ConvGeometry g = {}) {
  const bool single = input.rank() == 3;
  Tensor<Scalar> reshaped_input;
  const Tensor<Scalar>& x = detail::as_batch(input, reshaped_input, "conv2d input");
  const auto d = detail::conv_dims<Scalar>(x.shape(), weights.shape(), g);
  if (bias.size() != d.out_c) throw ShapeError("conv2d: bias length does not match output channels");

  const Index P = d.pixels();
  Tensor<Scalar> out({d.batch, d.out_c, d.out_h, d.out_w});
  const auto W = weights.matrix(d.out_c);
  const auto& bvec = bias.values();

  if (d.kernel == 1 && g.stride == 1 && g.padding == 0) {
    for (Index b = 0; b < d.batch; ++b) {
      ConstRowMatrixMap<Scalar> xb(x.data() + b * d.in_c * P, d.in_c, P);
      RowMatrixMap<Scalar> yb(out.data() + b * d.out_c * P, d.out_c, P);
      yb.noalias() = W * xb;
      yb.colwise() += bvec;
    }
  } else {
    const Index chunk = detail::items_per_chunk(P);
    for (Index b0 = 0; b0 < d.batch; b0 += chunk) {
      const Index nb = std::min(chunk, d.batch - b0);
      auto cols = detail::scratch<Scalar>(0, d.patch(), nb * P);
      auto y = detail::scratch<Scalar>(1, d.out_c, nb * P);
      detail::im2col(x.data(), d, g, b0, nb, cols);
      y.noalias() = W * cols;
      for (Index b = 0; b < nb; ++b) {
        RowMatrixMap<Scalar> yb(out.data() + (b0 + b) * d.out_c * P, d.out_c, P);
        yb = y.middleCols(b * P, P);
        yb.colwise() += bvec;
      }
    }
  }
  if (single) return std::move(out).reshaped({d.out_c, d.out_h, d.out_w});
  return out;
}

template <typename Scalar>
struct ConvGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> weights;
  Tensor<Scalar> bias;
};

template <typename Scalar>
ConvGrads<Scalar> conv2d_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights, const Tensor<Scalar>& grad_output,
                                  ConvGeometry g = {}) {
  const bool single = input.rank() == 3;
  Tensor<Scalar> reshaped_input;
  const Tensor<Scalar>& x = detail::as_batch(input, reshaped_input, "conv2d input");
  const auto d = detail::conv_dims<Scalar>(x.shape(), weights.shape(), g);
  const Index P = d.pixels();
  if (grad_output.size() != d.batch * d.out_c * P) throw ShapeError("conv2d_backward: gradient does not match output shape");

  ConvGrads<Scalar> grads{Tensor<Scalar>(x.shape()), Tensor<Scalar>(weights.shape()), Tensor<Scalar>({d.out_c})};
  const auto W = weights.matrix(d.out_c);
  auto dW = grads.weights.matrix(d.out_c);
  auto& db = grads.bias.values();

  if (d.kernel == 1 && g.stride == 1 && g.padding == 0) {
    for (Index b = 0; b < d.batch; ++b) {
      ConstRowMatrixMap<Scalar> xb(x.data() + b * d.in_c * P, d.in_c, P);
      ConstRowMatrixMap<Scalar> gy(grad_output.data() + b * d.out_c * P, d.out_c, P);
      RowMatrixMap<Scalar> gx(grads.input.data() + b * d.in_c * P, d.in_c, P);
      dW.noalias() += gy * xb.transpose();
      db += gy.rowwise().sum();
      gx.noalias() = W.transpose() * gy;
    }
  } else {
    const Index chunk = detail::items_per_chunk(P);
    for (Index b0 = 0; b0 < d.batch; b0 += chunk) {
      const Index nb = std::min(chunk, d.batch - b0);
      auto cols = detail::scratch<Scalar>(0, d.patch(), nb * P);
      auto gy = detail::scratch<Scalar>(1, d.out_c, nb * P);
      auto gcols = detail::scratch<Scalar>(2, d.patch(), nb * P);
      detail::im2col(x.data(), d, g, b0, nb, cols);
      for (Index b = 0; b < nb; ++b)
        gy.middleCols(b * P, P) = ConstRowMatrixMap<Scalar>(grad_output.data() + (b0 + b) * d.out_c * P, d.out_c, P);
      dW.noalias() += gy * cols.transpose();
      db += gy.rowwise().sum();
      gcols.noalias() = W.transpose() * gy;
      detail::col2im(gcols, d, g, b0, nb, grads.input.data());
    }
  }
  if (single) grads.input = std::move(grads.input).reshaped(input.shape());
  return grads;
}

// ---------------------------------------------------------------------------
// batch_norm: per-channel normalisation over batch and spatial axes.

template <typename Scalar>
struct RunningStats {
  Vector<Scalar> mean;
  Vector<Scalar> var;
  bool initialized = false;

  /// Mean 0, variance 1: the explicit initialisation that permits eval mode before training.
  static RunningStats identity(Index channels) {
    return {Vector<Scalar>::Zero(channels), Vector<Scalar>::Ones(channels), true};
  }
};

template <typename Scalar>
struct BatchNormCache {
  Tensor<Scalar> normalized;
  Vector<Scalar> inv_std;
  Mode mode = Mode::Train;
};

struct BatchNormOptions {
  double momentum = 0.1;
  double eps = 1e-5;
};

template <typename Scalar>
Tensor<Scalar> batch_norm(const Tensor<Scalar>& input, const Tensor<Scalar>& scale, const Tensor<Scalar>& shift, RunningStats<Scalar>& running,
                          Mode mode, BatchNormOptions opt = {}, BatchNormCache<Scalar>* cache = nullptr) {
  require_rank(input.shape(), 4, "batch_norm input");
  const Index B = input.dim(0), C = input.dim(1), P = input.dim(2) * input.dim(3);
  if (scale.size() != C || shift.size() != C) throw ShapeError("batch_norm: scale/shift length must equal channel count");
  if (B < 1) throw ShapeError("batch_norm: empty batch");

  Vector<Scalar> mean(C), var(C);
  if (mode == Mode::Train) {
    const Index n = B * P;
    if (n < 2) throw ShapeError("batch_norm: training needs at least 2 values per channel");
    for (Index c = 0; c < C; ++c) {
      Scalar s = 0;
      for (Index b = 0; b < B; ++b) s += input.values().segment((b * C + c) * P, P).sum();
      mean[c] = s / Scalar(n);
      Scalar ss = 0;
      for (Index b = 0; b < B; ++b) ss += (input.values().segment((b * C + c) * P, P).array() - mean[c]).square().sum();
      var[c] = ss / Scalar(n);
    }
    if (!running.initialized) running = RunningStats<Scalar>::identity(C);
    const Scalar m = Scalar(opt.momentum);
    running.mean = (Scalar(1) - m) * running.mean + m * mean;
    running.var = (Scalar(1) - m) * running.var + m * var * (Scalar(n) / Scalar(n - 1));
  } else {
    if (!running.initialized) throw ArgumentError("batch_norm: eval mode requires initialised running statistics");
    if (running.mean.size() != C) throw ShapeError("batch_norm: running statistics have the wrong channel count");
    mean = running.mean;
    var = running.var;
  }

  const Vector<Scalar> inv_std = (var.array() + Scalar(opt.eps)).rsqrt().matrix();
  Tensor<Scalar> normalized(input.shape());
  Tensor<Scalar> out(input.shape());
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c) {
      const Index off = (b * C + c) * P;
      normalized.values().segment(off, P) = (input.values().segment(off, P).array() - mean[c]) * inv_std[c];
      out.values().segment(off, P) = normalized.values().segment(off, P).array() * scale[c] + shift[c];
    }
  if (cache) *cache = {std::move(normalized), inv_std, mode};
  return out;
}

template <typename Scalar>
struct BatchNormGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> scale;
  Tensor<Scalar> shift;
};

template <typename Scalar>
BatchNormGrads<Scalar> batch_norm_backward(const BatchNormCache<Scalar>& cache, const Tensor<Scalar>& scale, const Tensor<Scalar>& grad_output) {
  const auto& xhat = cache.normalized;
  const Index B = xhat.dim(0), C = xhat.dim(1), P = xhat.dim(2) * xhat.dim(3);
  const Scalar n = Scalar(B * P);
  BatchNormGrads<Scalar> g{Tensor<Scalar>(xhat.shape()), Tensor<Scalar>({C}), Tensor<Scalar>({C})};
  for (Index c = 0; c < C; ++c) {
    Scalar sum_dy = 0, sum_dy_xhat = 0;
    for (Index b = 0; b < B; ++b) {
      const Index off = (b * C + c) * P;
      sum_dy += grad_output.values().segment(off, P).sum();
      sum_dy_xhat += grad_output.values().segment(off, P).dot(xhat.values().segment(off, P));
    }
    g.shift[c] = sum_dy;
    g.scale[c] = sum_dy_xhat;
    const Scalar k = scale[c] * cache.inv_std[c];
    for (Index b = 0; b < B; ++b) {
      const Index off = (b * C + c) * P;
      auto dx = g.input.values().segment(off, P).array();
      if (cache.mode == Mode::Train)
        dx = k / n * (n * grad_output.values().segment(off, P).array() - sum_dy - xhat.values().segment(off, P).array() * sum_dy_xhat);
      else
        dx = k * grad_output.values().segment(off, P).array();
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Elementwise activations.

template <typename Scalar>
Tensor<Scalar> leaky_relu(const Tensor<Scalar>& input, Scalar slope = Scalar(0.01)) {
  Tensor<Scalar> out(input.shape());
  out.values() = input.values().unaryExpr([slope](Scalar v) { return v > Scalar(0) ? v : slope * v; });
  return out;
}

/// The subgradient at exactly zero is the slope.
template <typename Scalar>
Tensor<Scalar> leaky_relu_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& grad_output, Scalar slope = Scalar(0.01)) {
  Tensor<Scalar> g(input.shape());
  g.values() = input.values().binaryExpr(grad_output.values(), [slope](Scalar v, Scalar d) { return v > Scalar(0) ? d : slope * d; });
  return g;
}

template <typename Scalar>
Scalar sigmoid(Scalar v) {
  if (v >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-v));
  const Scalar e = std::exp(v);
  return e / (Scalar(1) + e);
}

// ---------------------------------------------------------------------------
// bilinear_upsample: corner-aligned, source coordinate i * (h - 1) / (H - 1).

namespace detail {

struct LerpTap {
  Index lo, hi;
  double frac;
};

inline std::vector<LerpTap> lerp_taps(Index in, Index out) {
  std::vector<LerpTap> taps(static_cast<std::size_t>(out));
  for (Index i = 0; i < out; ++i) {
    // Rational position keeps exact-doubling cases exact.
    const Index num = i * (in - 1);
    const Index lo = std::min(num / (out - 1), in - 1);
    const Index hi = std::min(lo + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, double(num - lo * (out - 1)) / double(out - 1)};
  }
  return taps;
}

}  // namespace detail

template <typename Scalar>
Tensor<Scalar> bilinear_upsample(const Tensor<Scalar>& input, Index out_h, Index out_w) {
  const bool single = input.rank() == 3;
  Tensor<Scalar> reshaped_input;
  const Tensor<Scalar>& x = detail::as_batch(input, reshaped_input, "bilinear_upsample input");
  const Index N = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < 2 || w < 2 || out_h < 2 || out_w < 2) throw ShapeError("bilinear_upsample: all spatial sizes must be >= 2");
  if (out_h < h || out_w < w)
    throw ShapeError("bilinear_upsample: target " + std::to_string(out_h) + "x" + std::to_string(out_w) + " is smaller than input");
  const auto ty = detail::lerp_taps(h, out_h), tx = detail::lerp_taps(w, out_w);
  Tensor<Scalar> out({x.dim(0), x.dim(1), out_h, out_w});
  for (Index n = 0; n < N; ++n) {
    const Scalar* src = x.data() + n * h * w;
    Scalar* dst = out.data() + n * out_h * out_w;
    for (Index i = 0; i < out_h; ++i) {
      const auto& a = ty[static_cast<std::size_t>(i)];
      const Scalar fy = Scalar(a.frac);
      for (Index j = 0; j < out_w; ++j) {
        const auto& t = tx[static_cast<std::size_t>(j)];
        const Scalar fx = Scalar(t.frac);
        const Scalar top = src[a.lo * w + t.lo] + fx * (src[a.lo * w + t.hi] - src[a.lo * w + t.lo]);
        const Scalar bot = src[a.hi * w + t.lo] + fx * (src[a.hi * w + t.hi] - src[a.hi * w + t.lo]);
        dst[i * out_w + j] = top + fy * (bot - top);
      }
    }
  }
  if (single) return std::move(out).reshaped({x.dim(1), out_h, out_w});
  return out;
}

template <typename Scalar>
Tensor<Scalar> bilinear_upsample_backward(const Shape& input_shape, const Tensor<Scalar>& grad_output) {
  const bool single = input_shape.size() == 3;
  const Index B = single ? 1 : input_shape[0];
  const Index C = input_shape[input_shape.size() - 3], h = input_shape[input_shape.size() - 2], w = input_shape.back();
  const Index out_h = grad_output.shape()[grad_output.shape().size() - 2], out_w = grad_output.shape().back();
  const auto ty = detail::lerp_taps(h, out_h), tx = detail::lerp_taps(w, out_w);
  Tensor<Scalar> g(input_shape);
  for (Index n = 0; n < B * C; ++n) {
    Scalar* dst = g.data() + n * h * w;
    const Scalar* src = grad_output.data() + n * out_h * out_w;
    for (Index i = 0; i < out_h; ++i) {
      const auto& a = ty[static_cast<std::size_t>(i)];
      const Scalar fy = Scalar(a.frac);
      for (Index j = 0; j < out_w; ++j) {
        const auto& t = tx[static_cast<std::size_t>(j)];
        const Scalar fx = Scalar(t.frac);
        const Scalar d = src[i * out_w + j];
        dst[a.lo * w + t.lo] += (1 - fy) * (1 - fx) * d;
        dst[a.lo * w + t.hi] += (1 - fy) * fx * d;
        dst[a.hi * w + t.lo] += fy * (1 - fx) * d;
        dst[a.hi * w + t.hi] += fy * fx * d;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// global_avg_pool: B x C x H x W -> B x C (or C x H x W -> C).

template <typename Scalar>
Tensor<Scalar> global_avg_pool(const Tensor<Scalar>& input) {
  const bool single = input.rank() == 3;
  Tensor<Scalar> reshaped_input;
  const Tensor<Scalar>& x = detail::as_batch(input, reshaped_input, "global_avg_pool input");
  const Index N = x.dim(0) * x.dim(1), P = x.dim(2) * x.dim(3);
  if (P < 1) throw ShapeError("global_avg_pool: empty spatial extent");
  Tensor<Scalar> out({x.dim(0), x.dim(1)});
  out.values() = x.matrix(N).rowwise().mean();
  if (single) return std::move(out).reshaped({x.dim(1)});
  return out;
}

template <typename Scalar>
Tensor<Scalar> global_avg_pool_backward(const Shape& input_shape, const Tensor<Scalar>& grad_output) {
  Tensor<Scalar> g(input_shape);
  const Index N = grad_output.size();
  const Index P = g.size() / std::max<Index>(N, 1);
  g.matrix(N).colwise() = grad_output.values() / Scalar(P);
  return g;
}

// ---------------------------------------------------------------------------
// fully_connected: B x n times (m x n)^T plus bias.

template <typename Scalar>
Tensor<Scalar> fully_connected(const Tensor<Scalar>& input, const Tensor<Scalar>& weights, const Tensor<Scalar>& bias) {
  require_rank(input.shape(), 2, "fully_connected input");
  require_rank(weights.shape(), 2, "fully_connected weights");
  if (input.dim(1) != weights.dim(1))
    throw ShapeError("fully_connected: input width " + std::to_string(input.dim(1)) + " does not match weights " + shape_string(weights.shape()));
  if (bias.size() != weights.dim(0)) throw ShapeError("fully_connected: bias length does not match output width");
  Tensor<Scalar> out({input.dim(0), weights.dim(0)});
  auto y = out.matrix(input.dim(0));
  y.noalias() = input.matrix(input.dim(0)) * weights.matrix(weights.dim(0)).transpose();
  y.rowwise() += bias.values().transpose();
  return out;
}

template <typename Scalar>
struct LinearGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> weights;
  Tensor<Scalar> bias;
};

template <typename Scalar>
LinearGrads<Scalar> fully_connected_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights, const Tensor<Scalar>& grad_output) {
  const Index B = input.dim(0), m = weights.dim(0);
  LinearGrads<Scalar> g{Tensor<Scalar>(input.shape()), Tensor<Scalar>(weights.shape()), Tensor<Scalar>({m})};
  const auto gy = grad_output.matrix(B);
  g.input.matrix(B).noalias() = gy * weights.matrix(m);
  g.weights.matrix(m).noalias() = gy.transpose() * input.matrix(B);
  g.bias.values() = gy.colwise().sum().transpose();
  return g;
}

// ---------------------------------------------------------------------------
// dropout: inverted; survivors scaled by 1 / (1 - ratio) in train mode.

template <typename Scalar>
struct DropoutResult {
  Tensor<Scalar> output;
  Tensor<Scalar> mask;  ///< per-element multiplier reused by the backward pass
};

template <typename Scalar, typename Rng>
DropoutResult<Scalar> dropout(const Tensor<Scalar>& input, double ratio, Mode mode, Rng& rng) {
  if (!(ratio >= 0.0) || ratio >= 1.0) throw ArgumentError("dropout: ratio must lie in [0, 1), got " + std::to_string(ratio));
  DropoutResult<Scalar> r{input, Tensor<Scalar>::constant(input.shape(), Scalar(1))};
  if (mode == Mode::Eval || ratio == 0.0) return r;
  std::bernoulli_distribution drop(ratio);
  const Scalar keep_scale = Scalar(1) / Scalar(1 - ratio);
  for (Index i = 0; i < input.size(); ++i) r.mask[i] = drop(rng) ? Scalar(0) : keep_scale;
  r.output.values().array() *= r.mask.values().array();
  return r;
}

template <typename Scalar>
Tensor<Scalar> dropout_backward(const Tensor<Scalar>& mask, const Tensor<Scalar>& grad_output) {
  Tensor<Scalar> g(grad_output.shape());
  g.values() = grad_output.values().cwiseProduct(mask.values());
  return g;
}

}  // namespace oba

#endif  // OBA_LAYERS_HPP
