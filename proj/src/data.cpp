#include "oba/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "oba/binio.hpp"

namespace oba {

namespace {
constexpr std::string_view kDatasetMagic = "OBADS001";
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i].features.shape();
    if (s != Shape{channels(), height, width})
      throw ShapeError("sample " + std::to_string(i) + " has shape " + shape_string(s) + ", dataset expects " +
                       shape_string({channels(), height, width}));
  }
}

Dataset Dataset::subset(const std::vector<Index>& indices) const {
  Dataset out{feature_names, height, width, {}, stats};
  out.samples.reserve(indices.size());
  for (Index i : indices) out.samples.push_back(samples.at(static_cast<std::size_t>(i)));
  return out;
}

std::vector<double> Dataset::labels() const {
  std::vector<double> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(s.label);
  return y;
}

Tensord Dataset::stack(const std::vector<Index>& indices) const {
  const Index per = channels() * height * width;
  const Index n = indices.empty() ? size() : static_cast<Index>(indices.size());
  Tensord out({n, channels(), height, width});
  for (Index k = 0; k < n; ++k) {
    const auto& s = samples.at(static_cast<std::size_t>(indices.empty() ? k : indices[static_cast<std::size_t>(k)]));
    out.values().segment(k * per, per) = s.features.values();
  }
  return out;
}

std::optional<Index> Dataset::find_feature(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<Index>(it - feature_names.begin());
}

// OBADS001 ------------------------------------------------------------------

std::string encode_dataset(const Dataset& d) {
  d.validate();
  binio::Writer w;
  w.bytes(kDatasetMagic);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(d.size()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(d.channels()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(d.height));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(d.width));
  for (const auto& name : d.feature_names) {
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
  }
  for (const auto& s : d.samples) {
    w.f32(static_cast<float>(s.label));
    w.f32(static_cast<float>(s.lat));
    w.f32(static_cast<float>(s.lon));
    w.uint<std::uint64_t>(s.timestamp);
    for (Index i = 0; i < s.features.size(); ++i) w.f32(static_cast<float>(s.features[i]));
  }
  return w.take();
}

Dataset decode_dataset(std::string_view bytes) {
  if (bytes.size() < kDatasetMagic.size() || bytes.substr(0, kDatasetMagic.size()) != kDatasetMagic)
    throw FormatError(FormatError::Kind::BadMagic, "bad magic: not an OBADS001 dataset");
  binio::Reader r(bytes.substr(kDatasetMagic.size()));
  const Index n = r.uint<std::uint32_t>();
  const Index c = r.uint<std::uint32_t>();
  Dataset d;
  d.height = r.uint<std::uint32_t>();
  d.width = r.uint<std::uint32_t>();
  for (Index i = 0; i < c; ++i) {
    const auto len = r.uint<std::uint16_t>();
    d.feature_names.emplace_back(r.bytes(len));
  }
  const Index per = c * d.height * d.width;
  const std::size_t record = 20 + 4 * static_cast<std::size_t>(per);
  if (r.remaining() != record * static_cast<std::size_t>(n)) {
    if (r.remaining() < record * static_cast<std::size_t>(n))
      throw FormatError(FormatError::Kind::Truncated, "truncated payload: expected " + std::to_string(n) + " samples");
    throw FormatError(FormatError::Kind::ShapeInconsistency, "payload size does not match header shape");
  }
  d.samples.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    GridSample s;
    s.label = r.f32();
    s.lat = r.f32();
    s.lon = r.f32();
    s.timestamp = r.uint<std::uint64_t>();
    s.features = Tensord({c, d.height, d.width});
    for (Index i = 0; i < per; ++i) s.features[i] = r.f32();
    d.samples.push_back(std::move(s));
  }
  return d;
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) { binio::write_file(path, encode_dataset(d)); }

Dataset read_dataset(const std::filesystem::path& path) { return decode_dataset(binio::read_file(path)); }

// Feature screening ----------------------------------------------------------

double reduce_grid(const GridSample& s, Index channel, Index h, Index w, GridReduction reduction) {
  const Index P = h * w;
  if (reduction == GridReduction::CenterCell) return s.features[channel * P + (h / 2) * w + w / 2];
  return s.features.values().segment(channel * P, P).mean();
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // Relative test so that constant columns with rounding residue still count as constant.
  const double scale_x = std::max(1.0, std::abs(mx)), scale_y = std::max(1.0, std::abs(my));
  if (sxx <= 1e-24 * double(n) * scale_x * scale_x || syy <= 1e-24 * double(n) * scale_y * scale_y) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string base_feature_name(const std::string& name) { return name.substr(0, name.find('@')); }

FeatureSelection pearson_screen(const Dataset& d, double threshold, GridReduction reduction) {
  if (d.size() < 2) throw ArgumentError("pearson_screen: need at least 2 samples, got " + std::to_string(d.size()));
  d.validate();
  const auto y = d.labels();
  FeatureSelection sel;
  sel.coefficient.resize(static_cast<std::size_t>(d.channels()));
  std::vector<double> x(y.size());
  for (Index c = 0; c < d.channels(); ++c) {
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = reduce_grid(d.samples[i], c, d.height, d.width, reduction);
    sel.coefficient[static_cast<std::size_t>(c)] = pearson(x, y);
  }
  // Best |r| per base name; ties resolve to the lower index.
  std::map<std::string, Index> best;
  for (Index c = 0; c < d.channels(); ++c) {
    const auto base = base_feature_name(d.feature_names[static_cast<std::size_t>(c)]);
    auto it = best.find(base);
    if (it == best.end() || std::abs(sel.coefficient[static_cast<std::size_t>(c)]) > std::abs(sel.coefficient[static_cast<std::size_t>(it->second)]))
      best[base] = c;
  }
  for (const auto& [base, c] : best)
    if (std::abs(sel.coefficient[static_cast<std::size_t>(c)]) >= threshold) sel.kept.push_back(c);
  std::sort(sel.kept.begin(), sel.kept.end());
  return sel;
}

Dataset select_features(const Dataset& d, const std::vector<Index>& kept) {
  Dataset out{{}, d.height, d.width, {}, std::nullopt};
  for (Index c : kept) {
    if (c < 0 || c >= d.channels()) throw ArgumentError("feature index " + std::to_string(c) + " out of range");
    out.feature_names.push_back(d.feature_names[static_cast<std::size_t>(c)]);
  }
  const Index P = d.height * d.width;
  out.samples.reserve(d.samples.size());
  for (const auto& s : d.samples) {
    GridSample t = s;
    t.features = Tensord({static_cast<Index>(kept.size()), d.height, d.width});
    for (std::size_t k = 0; k < kept.size(); ++k) t.features.values().segment(static_cast<Index>(k) * P, P) = s.features.values().segment(kept[k] * P, P);
    out.samples.push_back(std::move(t));
  }
  if (d.stats) {
    NormalizationStats st{Vector<double>(static_cast<Index>(kept.size())), Vector<double>(static_cast<Index>(kept.size()))};
    for (std::size_t k = 0; k < kept.size(); ++k) {
      st.mean[static_cast<Index>(k)] = d.stats->mean[kept[k]];
      st.stddev[static_cast<Index>(k)] = d.stats->stddev[kept[k]];
    }
    out.stats = st;
  }
  return out;
}

std::string format_selection(const Dataset& d, const FeatureSelection& sel) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  for (Index c : sel.kept)
    out << c << '\t' << d.feature_names[static_cast<std::size_t>(c)] << '\t' << sel.coefficient[static_cast<std::size_t>(c)] << '\n';
  return out.str();
}

std::vector<Index> parse_selection(const std::string& text) {
  std::vector<Index> kept;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    try {
      std::size_t used = 0;
      const long v = std::stol(line.substr(0, tab), &used);
      if (used != line.substr(0, tab).size() || v < 0) throw std::invalid_argument("index");
      kept.push_back(v);
    } catch (const std::exception&) {
      throw FormatError(FormatError::Kind::ShapeInconsistency, "selection line " + std::to_string(lineno) + ": bad feature index");
    }
  }
  if (!std::is_sorted(kept.begin(), kept.end()) || std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    throw FormatError(FormatError::Kind::ShapeInconsistency, "selection indices must be strictly increasing");
  return kept;
}

// Windowing / normalisation / splitting --------------------------------------

Tensord slice_window(const Tensord& grid, Index row, Index col, Index half_extent) {
  require_rank(grid.shape(), 3, "slice_window grid");
  const Index C = grid.dim(0), H = grid.dim(1), W = grid.dim(2);
  if (half_extent < 0) throw ArgumentError("slice_window: negative half extent");
  if (row - half_extent < 0 || col - half_extent < 0 || row + half_extent >= H || col + half_extent >= W)
    throw ArgumentError("slice_window: window around (" + std::to_string(row) + ", " + std::to_string(col) + ") leaves the grid");
  const Index side = 2 * half_extent + 1;
  Tensord out({C, side, side});
  for (Index c = 0; c < C; ++c)
    for (Index i = 0; i < side; ++i)
      out.values().segment((c * side + i) * side, side) = grid.values().segment((c * H + row - half_extent + i) * W + col - half_extent, side);
  return out;
}

NormalizationStats fit_stats(const Dataset& d) {
  if (d.size() < 2) throw ArgumentError("normalize: need at least 2 samples to fit statistics");
  d.validate();
  const Index C = d.channels(), P = d.height * d.width;
  const double n = double(d.size() * P);
  NormalizationStats st{Vector<double>::Zero(C), Vector<double>::Zero(C)};
  for (const auto& s : d.samples)
    for (Index c = 0; c < C; ++c) st.mean[c] += s.features.values().segment(c * P, P).sum();
  st.mean /= n;
  for (const auto& s : d.samples)
    for (Index c = 0; c < C; ++c) st.stddev[c] += (s.features.values().segment(c * P, P).array() - st.mean[c]).square().sum();
  st.stddev = (st.stddev / n).cwiseSqrt();
  return st;
}

Dataset apply_stats(const Dataset& d, const NormalizationStats& stats) {
  if (stats.size() != d.channels())
    throw ShapeError("apply_stats: statistics cover " + std::to_string(stats.size()) + " features but dataset has " + std::to_string(d.channels()));
  const Index P = d.height * d.width;
  Dataset out = d;
  for (auto& s : out.samples)
    for (Index c = 0; c < d.channels(); ++c) {
      auto seg = s.features.values().segment(c * P, P).array();
      seg -= stats.mean[c];
      if (stats.stddev[c] >= kMinStd) seg /= stats.stddev[c];
    }
  out.stats = stats;
  return out;
}

std::pair<Dataset, NormalizationStats> normalize(const Dataset& d) {
  auto stats = fit_stats(d);
  return {apply_stats(d, stats), stats};
}

std::pair<Dataset, Dataset> split_rain(const Dataset& d) {
  std::vector<Index> rain, dry;
  for (Index i = 0; i < d.size(); ++i) (d.samples[static_cast<std::size_t>(i)].label > 0.0 ? rain : dry).push_back(i);
  return {d.subset(rain), d.subset(dry)};
}

SplitIndices split_indices(Index n, double test_fraction, std::uint64_t seed) {
  if (n < 5) throw ArgumentError("train_test_split: need at least 5 samples, got " + std::to_string(n));
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("train_test_split: test fraction must lie in (0, 1)");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
  const auto n_test = static_cast<std::size_t>(std::llround(double(n) * test_fraction));
  SplitIndices s{std::vector<Index>(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end()),
                 std::vector<Index>(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test))};
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  const auto s = split_indices(d.size(), test_fraction, seed);
  return {d.subset(s.train), d.subset(s.test)};
}

}  // namespace oba
