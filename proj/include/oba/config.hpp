#ifndef OBA_CONFIG_HPP
#define OBA_CONFIG_HPP

#include <filesystem>
#include <string>

#include "oba/synthgen.hpp"

namespace oba {

/// Run configuration read from `key = value` files with `[gen]`, `[train]`,
/// `[ordinal]` and `[eval]` sections. Unset keys keep the defaults below.
struct RunConfig {
  GenConfig gen;

  struct Train {
    std::string arch = "full";
    Index batch = 256;
    double lr_eda = 1e-3;
    double wd_eda = 1e-2;
    double lr_ord = 1e-4;
    double wd_ord = 1e-4;
    double lr_sel = 1e-3;
    double wd_sel = 1e-4;
    double lr_sra = 1e-4;
    double wd_sra = 1e-4;
    Index epochs_eda = 30;
    Index epochs_ord = 20;
    Index epochs_sel = 20;
    Index epochs_sra = 20;
    double sigma = 0.01;
    double mu = 0.0;
    Index threads = 1;
  } train;

  struct Ordinal {
    double eta = 0.5;
    double xi = 0.5;
    double gamma = 2.0;
    std::string alpha_mode = "ranks";  ///< ranks | constant
    double alpha = 0.25;               ///< used when alpha_mode = constant
    std::string decode = "sum";        ///< sum | prefix
  } ordinal;

  struct Eval {
    double test_fraction = 0.2;
    double pearson_threshold = 0.2;
    std::string reduction = "mean";  ///< mean | center
    std::string bi_channel = "tp";
  } eval;

  /// Effective configuration in the same file syntax, every key listed.
  std::string echo() const;

  /// Applies one `key = value` assignment, e.g. ("train", "sigma", "0.05").
  void set(const std::string& section, const std::string& key, const std::string& value, int line = 0);
  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace oba

#endif  // OBA_CONFIG_HPP
