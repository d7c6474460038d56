#ifndef OBA_DATA_HPP
#define OBA_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oba/tensor.hpp"

namespace oba {

/// One station-centred sample: C x H x W predicted fields plus the observed
/// precipitation (mm). Labels are 0 or >= 0.1.
struct GridSample {
  Tensord features;
  double label = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  std::uint64_t timestamp = 0;

  friend bool operator==(const GridSample&, const GridSample&) = default;
};

struct NormalizationStats {
  Vector<double> mean;
  Vector<double> stddev;

  Index size() const { return mean.size(); }
};

/// Channels below this spread are centred but not rescaled.
inline constexpr double kMinStd = 1e-12;

struct Dataset {
  std::vector<std::string> feature_names;
  Index height = 0;
  Index width = 0;
  std::vector<GridSample> samples;
  std::optional<NormalizationStats> stats;

  Index channels() const { return static_cast<Index>(feature_names.size()); }
  Index size() const { return static_cast<Index>(samples.size()); }

  /// Throws ShapeError if any sample disagrees with channels() x height x width.
  void validate() const;

  Dataset subset(const std::vector<Index>& indices) const;
  std::vector<double> labels() const;
  /// N x C x H x W stack of the selected samples (all when `indices` is empty).
  Tensord stack(const std::vector<Index>& indices = {}) const;
  std::optional<Index> find_feature(const std::string& name) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.feature_names == b.feature_names && a.height == b.height && a.width == b.width && a.samples == b.samples;
  }
};

// OBADS001 ------------------------------------------------------------------

std::string encode_dataset(const Dataset& d);
Dataset decode_dataset(std::string_view bytes);
void write_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

// Feature screening ----------------------------------------------------------

enum class GridReduction { SpatialMean, CenterCell };

struct FeatureSelection {
  std::vector<Index> kept;
  std::vector<double> coefficient;  ///< Pearson r for every input feature
};

/// Per-sample scalar for one feature channel.
double reduce_grid(const GridSample& s, Index channel, Index h, Index w, GridReduction reduction);

/// Pearson r of x against y; 0 when either side has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Feature name without its altitude tag ("t@850" -> "t").
std::string base_feature_name(const std::string& name);

FeatureSelection pearson_screen(const Dataset& d, double threshold = 0.2, GridReduction reduction = GridReduction::SpatialMean);

/// Keeps only the selected channels, in the given order.
Dataset select_features(const Dataset& d, const std::vector<Index>& kept);

std::string format_selection(const Dataset& d, const FeatureSelection& sel);
std::vector<Index> parse_selection(const std::string& text);

// Windowing / normalisation / splitting --------------------------------------

/// C x (2*half+1) x (2*half+1) window of a C x H x W grid centred on (row, col).
Tensord slice_window(const Tensord& grid, Index row, Index col, Index half_extent = 8);

NormalizationStats fit_stats(const Dataset& d);
Dataset apply_stats(const Dataset& d, const NormalizationStats& stats);
std::pair<Dataset, NormalizationStats> normalize(const Dataset& d);

/// (rain: label > 0, dry: label == 0), order preserved.
std::pair<Dataset, Dataset> split_rain(const Dataset& d);

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Seeded uniform permutation; test takes round(n * test_fraction) samples.
/// Both index lists come back sorted.
SplitIndices split_indices(Index n, double test_fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_fraction, std::uint64_t seed);

}  // namespace oba

#endif  // OBA_DATA_HPP
