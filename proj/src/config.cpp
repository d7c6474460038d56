#include "oba/config.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <variant>
#include <vector>

#include "oba/binio.hpp"
#include "oba/text.hpp"

namespace oba {

namespace {

struct Field {
  const char* section;
  const char* key;
  std::variant<double*, Index*, std::string*, std::uint64_t*> target;
  std::vector<std::string> choices = {};
};

template <typename Config>
std::vector<Field> fields(Config& c) {
  return {
      {"gen", "n_samples", &c.gen.n_samples},
      {"gen", "n_features", &c.gen.n_features},
      {"gen", "grid", &c.gen.grid},
      {"gen", "p0", &c.gen.p0},
      {"gen", "mu_ln", &c.gen.mu_ln},
      {"gen", "sigma_ln", &c.gen.sigma_ln},
      {"gen", "y_max", &c.gen.y_max},
      {"gen", "obs_noise", &c.gen.obs_noise},
      {"gen", "feature_noise", &c.gen.feature_noise},
      {"gen", "n_noise_features", &c.gen.n_noise_features},
      {"gen", "tp_bias", &c.gen.tp_bias},
      {"gen", "tp_noise", &c.gen.tp_noise},
      {"gen", "blob_radius", &c.gen.blob_radius},
      {"gen", "center_jitter", &c.gen.center_jitter},
      {"train", "arch", &c.train.arch, {"full", "desk"}},
      {"train", "batch", &c.train.batch},
      {"train", "lr_eda", &c.train.lr_eda},
      {"train", "wd_eda", &c.train.wd_eda},
      {"train", "lr_ord", &c.train.lr_ord},
      {"train", "wd_ord", &c.train.wd_ord},
      {"train", "lr_sel", &c.train.lr_sel},
      {"train", "wd_sel", &c.train.wd_sel},
      {"train", "lr_sra", &c.train.lr_sra},
      {"train", "wd_sra", &c.train.wd_sra},
      {"train", "epochs_eda", &c.train.epochs_eda},
      {"train", "epochs_ord", &c.train.epochs_ord},
      {"train", "epochs_sel", &c.train.epochs_sel},
      {"train", "epochs_sra", &c.train.epochs_sra},
      {"train", "sigma", &c.train.sigma},
      {"train", "mu", &c.train.mu},
      {"train", "threads", &c.train.threads},
      {"ordinal", "eta", &c.ordinal.eta},
      {"ordinal", "xi", &c.ordinal.xi},
      {"ordinal", "gamma", &c.ordinal.gamma},
      {"ordinal", "alpha_mode", &c.ordinal.alpha_mode, {"ranks", "constant"}},
      {"ordinal", "alpha", &c.ordinal.alpha},
      {"ordinal", "decode", &c.ordinal.decode, {"sum", "prefix"}},
      {"eval", "test_fraction", &c.eval.test_fraction},
      {"eval", "pearson_threshold", &c.eval.pearson_threshold},
      {"eval", "reduction", &c.eval.reduction, {"mean", "center"}},
      {"eval", "bi_channel", &c.eval.bi_channel},
  };
}

std::string render(const Field& f) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>)
          return text::format_double(*p);
        else if constexpr (std::is_same_v<T, std::string>)
          return *p;
        else
          return std::to_string(*p);
      },
      f.target);
}

}  // namespace

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value, int line) {
  for (auto& f : fields(*this)) {
    if (section != f.section || key != f.key) continue;
    const std::string name = "'" + section + "." + key + "'";
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>) {
            auto v = text::parse_double(value);
            if (!v) throw ConfigError("type error: " + name + " expects a real number, got '" + value + "'", line);
            *p = *v;
          } else if constexpr (std::is_same_v<T, std::string>) {
            if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), value) == f.choices.end())
              throw ConfigError("type error: " + name + " must be one of the listed choices, got '" + value + "'", line);
            *p = value;
          } else {
            auto v = text::parse_int(value);
            if (!v || *v < 0) throw ConfigError("type error: " + name + " expects a non-negative integer, got '" + value + "'", line);
            *p = static_cast<T>(*v);
          }
        },
        f.target);
    return;
  }
  throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line);
}

void RunConfig::validate() const {
  gen.validate();
  if (train.batch < 1) throw ConfigError("train.batch must be >= 1");
  if (train.sigma < 0) throw ConfigError("train.sigma must be >= 0");
  if (train.threads < 1) throw ConfigError("train.threads must be >= 1");
  if (!(ordinal.eta > 0) || ordinal.eta > gen.y_max) throw ConfigError("ordinal.eta must lie in (0, y_max]");
  if (!(ordinal.xi > 0 && ordinal.xi < 1)) throw ConfigError("ordinal.xi must lie in (0, 1)");
  if (ordinal.gamma < 0) throw ConfigError("ordinal.gamma must be >= 0");
  if (!(ordinal.alpha > 0 && ordinal.alpha < 1)) throw ConfigError("ordinal.alpha must lie in (0, 1)");
  if (!(eval.test_fraction > 0 && eval.test_fraction < 1)) throw ConfigError("eval.test_fraction must lie in (0, 1)");
}

std::string RunConfig::echo() const {
  auto& self = const_cast<RunConfig&>(*this);
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields(self)) {
    if (section != f.section) {
      out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << render(f) << '\n';
  }
  return out.str();
}

RunConfig parse_config(const std::string& content) {
  RunConfig cfg;
  std::istringstream in(content);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = text::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header", line);
      section = std::string(text::trim(s.substr(1, s.size() - 2)));
      if (section != "gen" && section != "train" && section != "ordinal" && section != "eval")
        throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError("malformed line (expected key = value)", line);
    const std::string key(text::trim(s.substr(0, eq)));
    const std::string value(text::trim(s.substr(eq + 1)));
    if (key.empty() || value.empty()) throw ConfigError("malformed line (empty key or value)", line);
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any [section]", line);
    cfg.set(section, key, value, line);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(binio::read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace oba
