#include <gtest/gtest.h>

#include "oba/layers.hpp"
#include "oracles.hpp"

using namespace oba;

namespace {

std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace

TEST(Conv2d, OneByOneIdentityKernel) {
  auto rng = rng_for(1);
  const Tensord x = oracle::random_tensor({2, 3, 4, 5}, rng);
  Tensord w({3, 3, 1, 1});
  for (Index c = 0; c < 3; ++c) w(c, c, 0, 0) = 1.0;
  EXPECT_EQ(conv2d(x, w, Tensord({3})), x);
}

TEST(Conv2d, AllOnesKernelOnConstantInput) {
  const Tensord x = Tensord::constant({1, 1, 5, 5}, 0.7);
  const Tensord y = conv2d(x, Tensord::constant({1, 1, 3, 3}, 1.0), Tensord({1}));
  ASSERT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  for (Index i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], 9 * 0.7, 1e-15);
}

TEST(Conv2d, MatchesDirectLoopStrideTwoPadOne) {
  auto rng = rng_for(2);
  const Tensord x = oracle::random_tensor({2, 3, 5, 5}, rng);
  const Tensord w = oracle::random_tensor({4, 3, 3, 3}, rng);
  const Tensord b = oracle::random_tensor({4}, rng);
  const Tensord y = conv2d(x, w, b, {2, 1});
  EXPECT_EQ(y.shape(), (Shape{2, 4, 3, 3}));
  EXPECT_LE(oracle::max_abs_diff(y, oracle::conv2d(x, w, b, 2, 1)), 1e-12);
}

TEST(Conv2d, MatchesDirectLoopOnFiftyRandomConfigurations) {
  auto rng = rng_for(3);
  std::uniform_int_distribution<Index> dim(1, 4), size(3, 9), stride(1, 2), pad(0, 1), kernel(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = kernel(rng) ? 3 : 1;
    const Index B = dim(rng), C = dim(rng), O = dim(rng), H = size(rng), W = size(rng);
    const ConvGeometry g{stride(rng), pad(rng)};
    const Tensord x = oracle::random_tensor({B, C, H, W}, rng);
    const Tensord w = oracle::random_tensor({O, C, k, k}, rng);
    const Tensord b = oracle::random_tensor({O}, rng);
    EXPECT_LE(oracle::max_abs_diff(conv2d(x, w, b, g), oracle::conv2d(x, w, b, g.stride, g.padding)), 1e-12) << "trial " << trial;
  }
}

TEST(Conv2d, RankThreeInputIsOneItemBatch) {
  auto rng = rng_for(4);
  const Tensord x = oracle::random_tensor({2, 4, 4}, rng);
  const Tensord w = oracle::random_tensor({3, 2, 3, 3}, rng);
  const Tensord y = conv2d(x, w, Tensord({3}), {1, 1});
  EXPECT_EQ(y.shape(), (Shape{3, 4, 4}));
  EXPECT_EQ(y.values(), conv2d(x.reshaped({1, 2, 4, 4}), w, Tensord({3}), {1, 1}).values());
}

TEST(Conv2d, ChannelMismatchIsShapeError) {
  const Tensord x({1, 2, 4, 4});
  try {
    conv2d(x, Tensord({1, 3, 3, 3}), Tensord({1}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channels"), std::string::npos);
  }
}

TEST(BatchNorm, ConstantChannelTrainModeGivesShift) {
  RunningStats<double> rs = RunningStats<double>::identity(2);
  const Tensord x = Tensord::constant({3, 2, 2, 2}, 4.0);
  const Tensord y = batch_norm(x, oracle::values({2}, {1.5, 2.0}), oracle::values({2}, {0.25, -1.0}), rs, Mode::Train);
  for (Index n = 0; n < 3; ++n)
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j) {
        EXPECT_DOUBLE_EQ(y(n, 0, i, j), 0.25);
        EXPECT_DOUBLE_EQ(y(n, 1, i, j), -1.0);
      }
}

TEST(BatchNorm, TrainModeNormalisesEachChannel) {
  auto rng = rng_for(5);
  RunningStats<double> rs = RunningStats<double>::identity(3);
  const Tensord x = oracle::random_tensor({4, 3, 5, 5}, rng, -3.0, 7.0);
  const Tensord y = batch_norm(x, Tensord::constant({3}, 1.0), Tensord({3}), rs, Mode::Train);
  for (Index c = 0; c < 3; ++c) {
    double s = 0, ss = 0;
    for (Index n = 0; n < 4; ++n)
      for (Index i = 0; i < 25; ++i) s += y.values()[(n * 3 + c) * 25 + i];
    const double mean = s / 100;
    for (Index n = 0; n < 4; ++n)
      for (Index i = 0; i < 25; ++i) ss += std::pow(y.values()[(n * 3 + c) * 25 + i] - mean, 2);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(ss / 100, 1.0, 1e-4);
  }
}

TEST(BatchNorm, RunningStatsUpdateWithMomentum) {
  RunningStats<double> rs = RunningStats<double>::identity(1);
  Tensord x({1, 1, 1, 4});
  x.values() << 1, 2, 3, 4;
  batch_norm(x, Tensord::constant({1}, 1.0), Tensord({1}), rs, Mode::Train);
  EXPECT_NEAR(rs.mean[0], 0.1 * 2.5, 1e-15);
  EXPECT_NEAR(rs.var[0], 0.9 + 0.1 * (5.0 / 3.0), 1e-15);
}

TEST(BatchNorm, EvalNeedsInitialisedStats) {
  RunningStats<double> rs;
  EXPECT_THROW(batch_norm(Tensord({1, 1, 2, 2}), Tensord::constant({1}, 1.0), Tensord({1}), rs, Mode::Eval), ArgumentError);
  rs = RunningStats<double>::identity(1);
  const Tensord x = Tensord::constant({1, 1, 2, 2}, 3.0);
  const Tensord y = batch_norm(x, Tensord::constant({1}, 1.0), Tensord({1}), rs, Mode::Eval);
  EXPECT_NEAR(y[0], 3.0 / std::sqrt(1.0 + 1e-5), 1e-15);
}

TEST(BatchNorm, TrainNeedsTwoValuesPerChannel) {
  RunningStats<double> rs = RunningStats<double>::identity(1);
  EXPECT_THROW(batch_norm(Tensord({1, 1, 1, 1}), Tensord::constant({1}, 1.0), Tensord({1}), rs, Mode::Train), ShapeError);
}

TEST(LeakyRelu, Values) {
  Tensord x({3});
  x.values() << 2.0, -1.0, 0.0;
  const Tensord y = leaky_relu(x, 0.01);
  EXPECT_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], -0.01);
  EXPECT_EQ(y[2], 0.0);
  const Tensord g = leaky_relu_backward(x, Tensord::constant({3}, 1.0), 0.01);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.01);
  EXPECT_DOUBLE_EQ(g[2], 0.01);
}

TEST(Bilinear, ExactDoublingIdentity) {
  auto rng = rng_for(6);
  const Tensord x = oracle::random_tensor({2, 9, 9}, rng);
  const Tensord y = bilinear_upsample(x, 17, 17);
  for (Index c = 0; c < 2; ++c)
    for (Index i = 0; i < 9; ++i)
      for (Index j = 0; j < 9; ++j) {
        EXPECT_EQ(y(c, 2 * i, 2 * j), x(c, i, j));
        if (j < 8) {
          EXPECT_NEAR(y(c, 2 * i, 2 * j + 1), (x(c, i, j) + x(c, i, j + 1)) / 2, 1e-15);
        }
      }
}

TEST(Bilinear, ConstantStaysConstant) {
  const Tensord y = bilinear_upsample(Tensord::constant({1, 3, 4}, 2.5), 7, 11);
  for (Index i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 2.5);
}

TEST(Bilinear, MatchesPerPixelOracle) {
  auto rng = rng_for(7);
  const Tensord x = oracle::random_tensor({1, 9, 9}, rng);
  EXPECT_LE(oracle::max_abs_diff(bilinear_upsample(x, 17, 17), oracle::bilinear(x, 17, 17)), 1e-12);
  const Tensord x2 = oracle::random_tensor({3, 4, 6}, rng);
  EXPECT_LE(oracle::max_abs_diff(bilinear_upsample(x2, 10, 13), oracle::bilinear(x2, 10, 13)), 1e-12);
}

TEST(Bilinear, RejectsShrinking) {
  EXPECT_THROW(bilinear_upsample(Tensord({1, 5, 5}), 4, 6), ShapeError);
}

TEST(GlobalAvgPool, Values) {
  Tensord x({1, 2, 2});
  x.values() << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(global_avg_pool(x)[0], 2.5);
  const Tensord c = global_avg_pool(Tensord::constant({3, 4, 5}, -1.25));
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(c[i], -1.25);
}

TEST(FullyConnected, IdentityAndBiasOnly) {
  auto rng = rng_for(8);
  const Tensord x = oracle::random_tensor({4, 3}, rng);
  Tensord eye({3, 3});
  for (Index i = 0; i < 3; ++i) eye(i, i) = 1.0;
  EXPECT_EQ(fully_connected(x, eye, Tensord({3})), x);
  Tensord b({2});
  b.values() << 0.5, -2.0;
  const Tensord y = fully_connected(x, Tensord({2, 3}), b);
  for (Index n = 0; n < 4; ++n) {
    EXPECT_EQ(y(n, 0), 0.5);
    EXPECT_EQ(y(n, 1), -2.0);
  }
}

TEST(FullyConnected, MatchesDotProductOracle) {
  auto rng = rng_for(9);
  const Tensord x = oracle::random_tensor({5, 7}, rng);
  const Tensord w = oracle::random_tensor({3, 7}, rng);
  const Tensord b = oracle::random_tensor({3}, rng);
  EXPECT_LE(oracle::max_abs_diff(fully_connected(x, w, b), oracle::fully_connected(x, w, b)), 1e-12);
  EXPECT_THROW(fully_connected(x, Tensord({3, 6}), b), ShapeError);
}

TEST(Dropout, IdentityCases) {
  auto rng = rng_for(10);
  const Tensord x = oracle::random_tensor({50}, rng);
  EXPECT_EQ(dropout(x, 0.0, Mode::Train, rng).output, x);
  EXPECT_EQ(dropout(x, 0.5, Mode::Eval, rng).output, x);
  EXPECT_THROW(dropout(x, 1.0, Mode::Train, rng), ArgumentError);
}

TEST(Dropout, InvertedScalingStatistics) {
  auto rng = rng_for(11);
  const Tensord x = Tensord::constant({100000}, 1.0);
  const auto r = dropout(x, 0.2, Mode::Train, rng);
  const double zeros = double((r.output.values().array() == 0.0).count()) / 1e5;
  EXPECT_NEAR(r.output.values().mean(), 1.0, 0.01);
  EXPECT_NEAR(zeros, 0.2, 0.01);
  const Tensord g = dropout_backward(r.mask, Tensord::constant({100000}, 1.0));
  EXPECT_EQ(g, r.output);
}
