#include "oba/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "oba/random.hpp"

namespace oba {

namespace {

constexpr std::array<const char*, 16> kSignalNames = {"r@850", "r@700", "q@850", "q@700", "tcw", "w@700", "cape", "kx",
                                                      "t@850", "t@500", "pv@500", "tcc", "lcc", "cp", "d@850", "vo@850"};
constexpr std::array<const char*, 8> kNoiseNames = {"u@200", "v@200", "msl", "z@500", "sst", "stl1", "skt", "tco3"};

constexpr std::uint64_t kSeasonStart = 1467331200;  // 2016-07-01T00:00Z
constexpr std::uint64_t kSixHours = 6 * 3600;
constexpr std::uint64_t kSeasonSteps = 92 * 4;

Index signal_count(const GenConfig& c) { return c.n_features - 1 - c.n_noise_features; }

double as_float(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void GenConfig::validate() const {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ArgumentError("gen: p0 must lie in [0, 1]");
  if (y_min != 0.1) throw ArgumentError("gen: y_min is fixed at 0.1 mm");
  if (!(y_max >= y_min && y_max <= 151.0)) throw ArgumentError("gen: y_max must lie in [0.1, 151]");
  if (n_features < 2 || n_noise_features < 0 || signal_count(*this) < 0) throw ArgumentError("gen: need the precipitation channel plus at least one more feature");
  if (grid < 1 || n_samples < 0) throw ArgumentError("gen: grid and n_samples must be positive");
  if (sigma_ln < 0 || obs_noise < 0 || feature_noise < 0 || tp_noise < 0 || blob_radius <= 0 || center_jitter < 0)
    throw ArgumentError("gen: scales must be non-negative");
}

std::vector<double> GenConfig::signal_coefficients() const {
  std::vector<double> a(static_cast<std::size_t>(n_features), 0.0);
  a[0] = tp_bias;
  for (Index j = 0; j < signal_count(*this); ++j) {
    // Decreasing strength; every third predictor is anti-correlated.
    const double mag = 1.0 / (1.0 + 0.3 * double(j));
    a[static_cast<std::size_t>(1 + j)] = (j % 3 == 2) ? -mag : mag;
  }
  return a;
}

std::vector<double> GenConfig::noise_scales() const {
  std::vector<double> s(static_cast<std::size_t>(n_features));
  s[0] = tp_noise;
  for (Index i = 1; i < n_features; ++i) s[static_cast<std::size_t>(i)] = feature_noise * (1.0 + 0.1 * double(i - 1));
  return s;
}

std::vector<std::string> GenConfig::feature_names() const {
  std::vector<std::string> names{kPrecipFeature};
  auto pick = [](const auto& table, Index j) {
    const auto n = static_cast<Index>(table.size());
    std::string base = table[static_cast<std::size_t>(j % n)];
    if (j >= n) base += "#" + std::to_string(j / n);
    return base;
  };
  for (Index j = 0; j < signal_count(*this); ++j) names.push_back(pick(kSignalNames, j));
  for (Index j = 0; j < n_noise_features; ++j) names.push_back(pick(kNoiseNames, j));
  return names;
}

double sample_label(Rng& rng, const GenConfig& config) {
  std::bernoulli_distribution dry(config.p0);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (dry(rng)) return 0.0;
  double y = std::exp(config.mu_ln + config.sigma_ln * normal(rng));
  y = std::clamp(y, config.y_min, config.y_max);
  y = std::clamp(std::round(y * 10.0) / 10.0, config.y_min, config.y_max);
  return as_float(y);
}

GridSample generate_sample(Rng& rng, double label, const GenConfig& config) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Index H = config.grid, C = config.n_features, P = H * H;
  const auto a = config.signal_coefficients();
  const auto s = config.noise_scales();

  GridSample out;
  out.label = label;
  out.lat = as_float(20.0 + 0.125 * double(rng() % 177));
  out.lon = as_float(105.0 + 0.125 * double(rng() % 145));
  out.timestamp = kSeasonStart + kSixHours * (rng() % kSeasonSteps);

  const double half = double(H - 1) / 2.0;
  const double cr = half + config.center_jitter * unit(rng);
  const double cc = half + config.center_jitter * unit(rng);
  const double seen = label > 0.0 ? label * std::exp(config.obs_noise * normal(rng)) : 0.0;

  std::vector<double> blob(static_cast<std::size_t>(P));
  for (Index r = 0; r < H; ++r)
    for (Index c = 0; c < H; ++c) {
      const double d2 = (double(r) - cr) * (double(r) - cr) + (double(c) - cc) * (double(c) - cc);
      blob[static_cast<std::size_t>(r * H + c)] = std::exp(-d2 / (2.0 * config.blob_radius * config.blob_radius));
    }

  out.features = Tensord({C, H, H});
  for (Index i = 0; i < C; ++i)
    for (Index p = 0; p < P; ++p) {
      const double signal = a[static_cast<std::size_t>(i)] * seen * blob[static_cast<std::size_t>(p)];
      const double noise = s[static_cast<std::size_t>(i)] == 0.0 ? 0.0 : s[static_cast<std::size_t>(i)] * normal(rng);
      out.features[i * P + p] = as_float(signal + noise);
    }
  return out;
}

Dataset generate_dataset(const GenConfig& config) {
  config.validate();
  Dataset d{config.feature_names(), config.grid, config.grid, {}, std::nullopt};
  d.samples.reserve(static_cast<std::size_t>(config.n_samples));
  for (Index i = 0; i < config.n_samples; ++i) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(i)));
    const double y = sample_label(rng, config);
    d.samples.push_back(generate_sample(rng, y, config));
  }
  return d;
}

}  // namespace oba
