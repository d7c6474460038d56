#ifndef OBA_GRAD_CHECK_HPP
#define OBA_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "oba/tensor.hpp"

namespace oba {

/// Central-difference gradient of a scalar function of `point`. `point` is
/// perturbed in place one element at a time and restored afterwards; `f`
/// reads it through whatever reference it captured.
template <typename Scalar, typename F>
Tensor<Scalar> numerical_gradient(F&& f, Tensor<Scalar>& point, Scalar h = Scalar(1e-6), std::string_view label = "function") {
  Tensor<Scalar> g(point.shape());
  for (Index i = 0; i < point.size(); ++i) {
    const Scalar saved = point[i];
    point[i] = saved + h;
    const Scalar up = f();
    point[i] = saved - h;
    const Scalar down = f();
    point[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("grad_check: non-finite output from " + std::string(label) + " at element " + std::to_string(i));
    g[i] = (up - down) / (Scalar(2) * h);
  }
  return g;
}

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-8)
template <typename Scalar>
Scalar max_relative_error(const Tensor<Scalar>& analytic, const Tensor<Scalar>& numeric) {
  if (analytic.shape() != numeric.shape()) throw ShapeError("grad_check: analytic and numeric gradients differ in shape");
  Scalar worst = 0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const Scalar a = analytic[i], n = numeric[i];
    const Scalar denom = std::max({std::abs(a), std::abs(n), Scalar(1e-8)});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

template <typename Scalar, typename F>
Scalar grad_check(F&& f, Tensor<Scalar>& point, const Tensor<Scalar>& analytic, Scalar h = Scalar(1e-6), std::string_view label = "function") {
  if (!analytic.all_finite()) throw NumericError("grad_check: non-finite analytic gradient from " + std::string(label));
  return max_relative_error(analytic, numerical_gradient(std::forward<F>(f), point, h, label));
}

}  // namespace oba

#endif  // OBA_GRAD_CHECK_HPP
