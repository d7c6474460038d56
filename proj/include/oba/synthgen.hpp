#ifndef OBA_SYNTHGEN_HPP
#define OBA_SYNTHGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "oba/data.hpp"
#include "oba/modules.hpp"

namespace oba {

/// Synthetic NWP-like sample generator. Labels follow a dry/log-normal
/// mixture; every feature is a Gaussian rain blob scaled by a noisy view of
/// the label plus per-cell noise.
struct GenConfig {
  Index n_samples = 5000;
  Index n_features = 12;
  Index grid = 17;
  double p0 = 0.6;  ///< probability of a dry sample
  double mu_ln = 0.0;
  double sigma_ln = 1.25;
  double y_min = 0.1;
  double y_max = 25.0;
  double obs_noise = 1.0;       ///< log-normal spread between observed rain and the rain the forecast "sees"
  double feature_noise = 0.2;   ///< per-cell additive noise of meteorological features
  Index n_noise_features = 3;   ///< trailing features with no signal
  double tp_bias = 1.5;         ///< multiplicative bias of the forecast precipitation channel
  double tp_noise = 0.3;        ///< additive noise of the forecast precipitation channel
  double blob_radius = 3.0;     ///< Gaussian width of the rain field, cells
  double center_jitter = 2.0;   ///< max offset of the rain field from the station, cells
  std::uint64_t seed = 0;

  /// Signal coefficients a_i (0 for noise features). Index 0 is the biased precipitation channel.
  std::vector<double> signal_coefficients() const;
  std::vector<double> noise_scales() const;
  std::vector<std::string> feature_names() const;

  void validate() const;
};

/// Name of the biased forecast-precipitation channel.
inline const std::string kPrecipFeature = "tp";

double sample_label(Rng& rng, const GenConfig& config);
GridSample generate_sample(Rng& rng, double label, const GenConfig& config);
Dataset generate_dataset(const GenConfig& config);

}  // namespace oba

#endif  // OBA_SYNTHGEN_HPP
