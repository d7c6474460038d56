#ifndef OBA_OPTIM_HPP
#define OBA_OPTIM_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "oba/tensor.hpp"

namespace oba {

/// A trainable tensor and its accumulated gradient (always the same shape).
struct Parameter {
  std::string name;
  Tensord value;
  Tensord grad;

  Parameter() = default;
  Parameter(std::string n, Tensord v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.values().setZero(); }
};

using ParamList = std::vector<Parameter*>;

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Moments are keyed by parameter name, so the parameter list order may change between steps.
struct AdamState {
  struct Moments {
    Vector<double> m;
    Vector<double> v;
  };

  AdamOptions options;
  std::int64_t step = 0;
  std::map<std::string, Moments> moments;

  AdamState() = default;
  explicit AdamState(AdamOptions opt) : options(opt) {}
};

/// One Adam update with bias correction and decoupled weight decay:
/// value <- value * (1 - lr * wd), then value -= lr * m_hat / (sqrt(v_hat) + eps).
inline void adam_step(std::span<Parameter* const> params, AdamState& state) {
  for (const Parameter* p : params)
    if (!p->grad.all_finite()) throw NumericError("adam_step: non-finite gradient in parameter '" + p->name + "'");

  const auto& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);

  for (Parameter* p : params) {
    auto& mom = state.moments[p->name];
    if (mom.m.size() != p->value.size()) {
      mom.m = Vector<double>::Zero(p->value.size());
      mom.v = Vector<double>::Zero(p->value.size());
    }
    const auto& g = p->grad.values();
    mom.m = o.beta1 * mom.m + (1.0 - o.beta1) * g;
    mom.v = o.beta2 * mom.v + (1.0 - o.beta2) * g.cwiseAbs2();
    auto& x = p->value.values();
    if (o.weight_decay != 0.0) x *= (1.0 - o.lr * o.weight_decay);
    x.array() -= o.lr * (mom.m.array() / c1) / ((mom.v.array() / c2).sqrt() + o.eps);
  }
}

inline void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace oba

#endif  // OBA_OPTIM_HPP
