#include "oba/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "oba/binio.hpp"
#include "oba/config.hpp"
#include "oba/pipeline.hpp"
#include "oba/plot.hpp"
#include "oba/synthgen.hpp"
#include "oba/text.hpp"

namespace oba::cli {

namespace fs = std::filesystem;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Reproduction record: command line, seed, effective config and input/output hashes.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args) : command_(std::move(command)) {
    for (const auto& a : args) argv_ += (argv_.empty() ? "" : " ") + a;
  }
  void seed(std::uint64_t s) { seed_ = s; }
  void config(const RunConfig& c) { config_ = c.echo(); }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void output(const fs::path& p) { outputs_.push_back(p); }

  void write(const fs::path& where) const {
    std::ostringstream m;
    m << "command = " << command_ << '\n' << "args = " << argv_ << '\n';
    if (seed_) m << "seed = " << *seed_ << '\n';
    for (const auto& p : inputs_) m << "input = " << p.string() << ' ' << hash(p) << '\n';
    for (const auto& p : outputs_) m << "output = " << p.string() << ' ' << hash(p) << '\n';
    if (!config_.empty()) m << "\n# effective config\n" << config_;
    binio::write_file(where, m.str());
  }

 private:
  static std::string hash(const fs::path& p) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().filename() != "run_manifest.txt") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::string all;
      for (const auto& f : files) all += f.filename().string() + '\0' + binio::read_file(f);
      return "fnv1a64:" + hex64(binio::fnv1a64(all));
    }
    return "fnv1a64:" + hex64(binio::fnv1a64(binio::read_file(p)));
  }

  std::string command_, argv_, config_;
  std::optional<std::uint64_t> seed_;
  std::vector<fs::path> inputs_, outputs_;
};

fs::path manifest_for(const fs::path& out) { return out.string() + ".run_manifest.txt"; }

RunConfig load_or_default(const std::string& path, Manifest& manifest) {
  if (path.empty()) return RunConfig{};
  manifest.input(path);
  return load_config(path);
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  for (const auto& tok : text::split(list, ',')) {
    auto v = text::parse_double(tok);
    if (!v) throw CLI::ValidationError("--values", "'" + tok + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

std::vector<Index> parse_indices(const std::string& list) {
  std::vector<Index> out;
  for (const auto& tok : text::split(list, ',')) {
    auto v = text::parse_int(tok);
    if (!v || *v < 0) throw CLI::ValidationError("--samples", "'" + tok + "' is not a sample index");
    out.push_back(static_cast<Index>(*v));
  }
  return out;
}

/// Lays per-sample values out as a near-square grid, row-major, padding with 0.
RowMatrix<double> tile(const std::vector<double>& v) {
  const auto side = static_cast<Index>(std::ceil(std::sqrt(double(v.size()))));
  const Index rows = (static_cast<Index>(v.size()) + side - 1) / side;
  RowMatrix<double> m = RowMatrix<double>::Zero(rows, side);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i) / side, static_cast<Index>(i) % side) = v[i];
  return m;
}

struct Options {
  std::string config, data, out, model, report, stage = "all", selection, param, values, kind, input, samples;
  std::uint64_t seed = 0;
  Index n_samples = 0;
  Index threads = 0;
};

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Ordinal boosting autoencoder for precipitation bias correction", "oba"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic OBADS001 dataset");
  gen->add_option("--config", o.config, "Config file");
  gen->add_option("--out", o.out, "Output dataset")->required();
  gen->add_option("--seed", o.seed, "Generator seed")->required();
  gen->add_option("--n", o.n_samples, "Override gen.n_samples");

  auto* screen = app.add_subcommand("screen", "Pearson feature screening");
  screen->add_option("--config", o.config, "Config file");
  screen->add_option("--data", o.data, "Input dataset")->required();
  screen->add_option("--out", o.out, "Selection text file")->required();

  auto* train = app.add_subcommand("train", "Train a model bundle");
  train->add_option("--config", o.config, "Config file");
  train->add_option("--data", o.data, "Input dataset")->required();
  train->add_option("--out", o.out, "Bundle directory")->required();
  train->add_option("--seed", o.seed, "Split and initialisation seed")->required();
  train->add_option("--stage", o.stage, "eda|ordinal|selector|sra|all")->check(CLI::IsMember({"eda", "ordinal", "selector", "sra", "all"}));
  train->add_option("--selection", o.selection, "Selection file from `screen` (default: screen the training split)");
  train->add_option("--threads", o.threads, "Override train.threads");

  auto* eval = app.add_subcommand("eval", "Score BI, LR, SRA and OBA on the test split");
  eval->add_option("--config", o.config, "Config file");
  eval->add_option("--data", o.data, "Input dataset")->required();
  eval->add_option("--model", o.model, "Bundle directory")->required();
  eval->add_option("--report", o.report, "Report CSV")->required();

  auto* predict = app.add_subcommand("predict", "Corrected precipitation for every sample");
  predict->add_option("--data", o.data, "Input dataset")->required();
  predict->add_option("--model", o.model, "Bundle directory")->required();
  predict->add_option("--out", o.out, "Prediction CSV")->required();

  auto* ablate_cmd = app.add_subcommand("ablate", "Retrain across sigma or eta values");
  ablate_cmd->add_option("--config", o.config, "Config file");
  ablate_cmd->add_option("--data", o.data, "Input dataset")->required();
  ablate_cmd->add_option("--param", o.param, "sigma|eta")->required()->check(CLI::IsMember({"sigma", "eta"}));
  ablate_cmd->add_option("--values", o.values, "Comma separated values")->required();
  ablate_cmd->add_option("--report", o.report, "Ablation CSV")->required();
  ablate_cmd->add_option("--seed", o.seed, "Seed shared by every run")->required();

  auto* plot_cmd = app.add_subcommand("plot", "Write an SVG figure");
  plot_cmd->add_option("--kind", o.kind, "histogram|ablation|heatmap")->required()->check(CLI::IsMember({"histogram", "ablation", "heatmap"}));
  plot_cmd->add_option("--input", o.input, "Dataset (histogram, heatmap) or ablation CSV")->required();
  plot_cmd->add_option("--out", o.out, "SVG file")->required();
  plot_cmd->add_option("--model", o.model, "Bundle directory (heatmap)");
  plot_cmd->add_option("--samples", o.samples, "Sample indices for the heatmap (default: first 16)");
  plot_cmd->add_option("--config", o.config, "Config file (heatmap)");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cerr << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "oba: " << e.what() << "\n";
    return kUsage;
  }

  auto* sub = app.get_subcommands().front();
  Manifest manifest(sub->get_name(), args);
  try {
    if (sub == gen) {
      RunConfig cfg = load_or_default(o.config, manifest);
      cfg.gen.seed = o.seed;
      if (o.n_samples > 0) cfg.gen.n_samples = o.n_samples;
      cfg.validate();
      write_dataset(generate_dataset(cfg.gen), o.out);
      manifest.seed(o.seed);
      manifest.config(cfg);
      manifest.output(o.out);
      manifest.write(manifest_for(o.out));
    } else if (sub == screen) {
      const RunConfig cfg = load_or_default(o.config, manifest);
      manifest.input(o.data);
      const Dataset d = read_dataset(o.data);
      const auto sel = pearson_screen(d, cfg.eval.pearson_threshold, cfg.eval.reduction == "center" ? GridReduction::CenterCell : GridReduction::SpatialMean);
      binio::write_file(o.out, format_selection(d, sel));
      manifest.config(cfg);
      manifest.output(o.out);
      manifest.write(manifest_for(o.out));
    } else if (sub == train) {
      RunConfig cfg = load_or_default(o.config, manifest);
      if (o.threads > 0) cfg.train.threads = o.threads;
      cfg.validate();
      manifest.input(o.data);
      const Dataset d = read_dataset(o.data);
      TrainRequest req;
      req.stage = parse_stage(o.stage);
      req.seed = o.seed;
      if (!o.selection.empty()) {
        manifest.input(o.selection);
        req.features = parse_selection(binio::read_file(o.selection));
      }
      std::optional<ModelBundle> base;
      if (req.stage != Stage::All && fs::exists(fs::path(o.out) / "manifest.txt")) {
        base = load_bundle(o.out);
        req.base = &*base;
      } else if (req.stage == Stage::Ordinal || req.stage == Stage::Sra) {
        throw FormatError(FormatError::Kind::MissingComponent, "missing component: eda (run `train --stage eda` into " + o.out + " first)");
      }
      auto result = train_pipeline(d, cfg, req);
      save_bundle(result.bundle, o.out);
      const fs::path losses = fs::path(o.out) / ("losses_" + o.stage + ".csv");
      binio::write_file(losses, format_curves(result.curves));
      if (result.selector_accuracy) std::cerr << "selector held-out accuracy: " << text::fixed6(*result.selector_accuracy) << '\n';
      manifest.seed(o.seed);
      manifest.config(cfg);
      manifest.output(o.out);
      manifest.write(fs::path(o.out) / "run_manifest.txt");
    } else if (sub == eval) {
      manifest.input(o.data);
      manifest.input(o.model);
      ModelBundle bundle = load_bundle(o.model);
      const RunConfig cfg = o.config.empty() && !bundle.config_echo.empty() ? parse_config(bundle.config_echo) : load_or_default(o.config, manifest);
      const auto ev = evaluate_bundle(read_dataset(o.data), bundle, cfg);
      binio::write_file(o.report, format_report(ev.rows));
      manifest.seed(bundle.split_seed);
      manifest.config(cfg);
      manifest.output(o.report);
      manifest.write(manifest_for(o.report));
    } else if (sub == predict) {
      manifest.input(o.data);
      manifest.input(o.model);
      ModelBundle bundle = load_bundle(o.model);
      const auto preds = oba::predict(bundle, prepare_inputs(bundle, read_dataset(o.data)));
      std::ostringstream csv;
      csv << "sample_index,prediction_mm\n";
      for (std::size_t i = 0; i < preds.size(); ++i) csv << i << ',' << text::fixed6(preds[i]) << '\n';
      binio::write_file(o.out, csv.str());
      manifest.output(o.out);
      manifest.write(manifest_for(o.out));
    } else if (sub == ablate_cmd) {
      const RunConfig cfg = load_or_default(o.config, manifest);
      manifest.input(o.data);
      const auto points = ablate(read_dataset(o.data), cfg, o.seed, o.param, parse_values(o.values));
      binio::write_file(o.report, format_ablation(points));
      manifest.seed(o.seed);
      manifest.config(cfg);
      manifest.output(o.report);
      manifest.write(manifest_for(o.report));
    } else if (sub == plot_cmd) {
      manifest.input(o.input);
      std::string svg;
      if (o.kind == "histogram") {
        svg = plot::histogram_svg(read_dataset(o.input).labels());
      } else if (o.kind == "ablation") {
        std::string param;
        const auto pts = plot::read_ablation_csv(binio::read_file(o.input), &param);
        svg = plot::ablation_svg(pts, param);
      } else {
        if (o.model.empty()) throw CLI::RequiredError("--model (needed for --kind heatmap)");
        manifest.input(o.model);
        const Dataset d = read_dataset(o.input);
        ModelBundle bundle = load_bundle(o.model);
        const RunConfig cfg = o.config.empty() && !bundle.config_echo.empty() ? parse_config(bundle.config_echo) : load_or_default(o.config, manifest);
        std::vector<Index> idx = o.samples.empty() ? std::vector<Index>{} : parse_indices(o.samples);
        if (idx.empty())
          for (Index i = 0; i < std::min<Index>(16, d.size()); ++i) idx.push_back(i);
        for (Index i : idx)
          if (i >= d.size()) throw ArgumentError("sample index " + std::to_string(i) + " out of range");
        const Dataset chosen = d.subset(idx);
        const auto channel = chosen.find_feature(cfg.eval.bi_channel);
        if (!channel) throw ArgumentError("dataset has no channel named '" + cfg.eval.bi_channel + "'");
        const auto preds = predict_all(bundle, prepare_inputs(bundle, chosen));
        std::vector<plot::Panel> panels{{"uncorrected", tile(baseline_bi(chosen, *channel))}};
        if (!preds.sra.empty()) panels.push_back({"SRA", tile(preds.sra)});
        panels.push_back({"OBA", tile(preds.oba)});
        panels.push_back({"truth", tile(chosen.labels())});
        svg = plot::heatmap_svg(panels);
      }
      binio::write_file(o.out, svg);
      manifest.output(o.out);
      manifest.write(manifest_for(o.out));
    }
  } catch (const CLI::Error& e) {
    std::cerr << "oba " << sub->get_name() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "oba " << sub->get_name() << ": config: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "oba " << sub->get_name() << ": numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "oba " << sub->get_name() << ": " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

int run(int argc, const char* const* argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace oba::cli
