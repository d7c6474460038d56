#include <gtest/gtest.h>

#include "oba/optim.hpp"

using namespace oba;

namespace {

// Five Adam steps on f(x) = x^2 from x = 1 with lr = 0.1.
std::vector<double> trace(double weight_decay) {
  Parameter p("x", Tensord::constant({1}, 1.0));
  AdamState state(AdamOptions{0.1, 0.9, 0.999, 1e-8, weight_decay});
  ParamList params{&p};
  std::vector<double> xs;
  for (int t = 0; t < 5; ++t) {
    zero_grads(params);
    p.grad[0] = 2.0 * p.value[0];
    adam_step(params, state);
    xs.push_back(p.value[0]);
  }
  return xs;
}

}  // namespace

TEST(Adam, QuadraticTraceWithoutDecay) {
  const std::vector<double> expected = {0.9000000005, 0.8004122286917928, 0.7015862729460303, 0.603939060573746, 0.507963659264342};
  const auto xs = trace(0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(xs[i], expected[i], 1e-12) << "step " << i + 1;
}

TEST(Adam, QuadraticTraceWithDecoupledDecay) {
  const std::vector<double> expected = {0.8990000005, 0.7985190271685215, 0.6989111831582322, 0.6005985741595427, 0.5040800900879452};
  const auto xs = trace(0.01);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(xs[i], expected[i], 1e-12) << "step " << i + 1;
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("w", Tensord::constant({3}, 0.0));
  p.grad.values() << 5.0, -0.01, 300.0;
  AdamState state(AdamOptions{0.01});
  ParamList params{&p};
  adam_step(params, state);
  EXPECT_NEAR(p.value[0], -0.01, 1e-9);
  EXPECT_NEAR(p.value[1], 0.01, 1e-6);
  EXPECT_NEAR(p.value[2], -0.01, 1e-9);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, MomentsFollowParameterNames) {
  Parameter a("a", Tensord::constant({1}, 1.0)), b("b", Tensord::constant({2}, 1.0));
  a.grad[0] = 1.0;
  b.grad.values().setConstant(-1.0);
  AdamState s1(AdamOptions{0.1}), s2(AdamOptions{0.1});
  Parameter a2 = a, b2 = b;
  ParamList forward{&a, &b}, reversed{&b2, &a2};
  for (int t = 0; t < 3; ++t) {
    adam_step(forward, s1);
    adam_step(reversed, s2);
  }
  EXPECT_EQ(a.value, a2.value);
  EXPECT_EQ(b.value, b2.value);
}

TEST(Adam, RejectsNonFiniteGradient) {
  Parameter p("bad", Tensord::constant({2}, 1.0));
  p.grad[1] = std::numeric_limits<double>::quiet_NaN();
  AdamState state;
  ParamList params{&p};
  try {
    adam_step(params, state);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  EXPECT_EQ(p.value[0], 1.0);
}
