#include "oba/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "oba/random.hpp"
#include "oba/text.hpp"

namespace oba {

Stage parse_stage(const std::string& name) {
  if (name == "eda") return Stage::Eda;
  if (name == "ordinal") return Stage::Ordinal;
  if (name == "selector") return Stage::Selector;
  if (name == "sra") return Stage::Sra;
  if (name == "all") return Stage::All;
  throw ArgumentError("unknown stage '" + name + "' (expected eda, ordinal, selector, sra or all)");
}

namespace {

TrainOptions options(const RunConfig& cfg, Index epochs, double lr, double wd, std::uint64_t seed) {
  TrainOptions o;
  o.epochs = static_cast<int>(epochs);
  o.batch = cfg.train.batch;
  o.adam.lr = lr;
  o.adam.weight_decay = wd;
  o.seed = seed;
  return o;
}

GridReduction reduction_of(const RunConfig& cfg) {
  return cfg.eval.reduction == "center" ? GridReduction::CenterCell : GridReduction::SpatialMean;
}

std::vector<Index> rainy(const std::vector<double>& y) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) idx.push_back(static_cast<Index>(i));
  return idx;
}

std::vector<double> pick(const std::vector<double>& v, const std::vector<Index>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

bool wants(Stage requested, Stage s) { return requested == Stage::All || requested == s; }

}  // namespace

TrainResult train_pipeline(const Dataset& raw, const RunConfig& cfg, const TrainRequest& req) {
  raw.validate();
  const Architecture arch = Architecture::by_name(cfg.train.arch);
  TrainResult result;
  ModelBundle& b = result.bundle;

  if (req.base && req.stage != Stage::All) {
    b = *req.base;
    if (b.split_seed != req.seed) throw ArgumentError("seed " + std::to_string(req.seed) + " differs from the bundle's split seed " + std::to_string(b.split_seed));
  } else {
    b.arch = arch;
    b.grid = raw.height;
    b.split_seed = req.seed;
    b.test_fraction = cfg.eval.test_fraction;
    b.partition = RankPartition(cfg.ordinal.eta, cfg.gen.y_max);
    b.xi = cfg.ordinal.xi;
    b.decode = cfg.ordinal.decode == "prefix" ? DecodeMode::Prefix : DecodeMode::Sum;
    b.noise = {cfg.train.mu, cfg.train.sigma};
  }
  b.config_echo = cfg.echo();

  const auto split = split_indices(raw.size(), b.test_fraction, b.split_seed);
  const Dataset train_raw = raw.subset(split.train);
  const Dataset test_raw = raw.subset(split.test);

  if (!req.base || req.stage == Stage::All) {
    if (req.features) {
      b.features = *req.features;
    } else {
      b.features = pearson_screen(train_raw, cfg.eval.pearson_threshold, reduction_of(cfg)).kept;
      if (b.features.empty()) throw ArgumentError("feature screening kept no channel; lower eval.pearson_threshold");
    }
    b.channels = static_cast<Index>(b.features.size());
    b.stats = fit_stats(select_features(train_raw, b.features));
  }

  const Tensord x = prepare_inputs(b, train_raw);
  const std::vector<double> y = train_raw.labels();
  const std::vector<Index> wet = rainy(y);

  if (wants(req.stage, Stage::Eda)) {
    b.eda.emplace(b.arch, b.channels, b.grid, stream_seed(req.seed, 10));
    result.curves["eda"] = train_eda(*b.eda, x, options(cfg, cfg.train.epochs_eda, cfg.train.lr_eda, cfg.train.wd_eda, stream_seed(req.seed, 11)), b.noise);
  }

  const bool need_z = wants(req.stage, Stage::Ordinal) || (wants(req.stage, Stage::Sra) && req.with_sra);
  Tensord z_wet;
  std::vector<double> y_wet;
  if (need_z) {
    if (!b.eda) throw FormatError(FormatError::Kind::MissingComponent, "missing component: eda (train the eda stage first)");
    if (wet.empty()) throw ArgumentError("training split holds no rainy sample");
    z_wet = encode_all(*b.eda, gather(x, wet));
    y_wet = pick(y, wet);
  }

  if (wants(req.stage, Stage::Ordinal)) {
    FocalParams focal;
    focal.gamma = cfg.ordinal.gamma;
    if (cfg.ordinal.alpha_mode == "constant")
      focal.alpha.assign(static_cast<std::size_t>(b.partition.size()), cfg.ordinal.alpha);
    else
      focal.alpha = rank_frequencies(y_wet, b.partition);
    auto trained = train_ordinal(z_wet, y_wet, b.partition, focal, b.arch,
                                 options(cfg, cfg.train.epochs_ord, cfg.train.lr_ord, cfg.train.wd_ord, stream_seed(req.seed, 20)),
                                 static_cast<int>(cfg.train.threads));
    b.subnets = std::move(trained.subnets);
    for (std::size_t k = 0; k < trained.curves.size(); ++k) result.curves["subnet_" + std::to_string(k + 1)] = std::move(trained.curves[k]);
  }

  if (wants(req.stage, Stage::Selector) && req.with_selector) {
    const Tensord x_test = prepare_inputs(b, test_raw);
    const std::vector<double> y_test = test_raw.labels();
    auto trained = train_selector(x, y, b.arch, options(cfg, cfg.train.epochs_sel, cfg.train.lr_sel, cfg.train.wd_sel, stream_seed(req.seed, 30)),
                                  &x_test, &y_test);
    b.selector = std::move(trained.selector);
    result.curves["selector"] = std::move(trained.curve);
    result.selector_accuracy = trained.holdout_accuracy;
  }

  if (wants(req.stage, Stage::Sra) && req.with_sra) {
    auto trained = train_sra(z_wet, y_wet, b.arch, options(cfg, cfg.train.epochs_sra, cfg.train.lr_sra, cfg.train.wd_sra, stream_seed(req.seed, 40)));
    b.sra = std::move(trained.sra);
    result.curves["sra"] = std::move(trained.curve);
  }
  return result;
}

Evaluation evaluate_bundle(const Dataset& raw, ModelBundle& bundle, const RunConfig& cfg) {
  raw.validate();
  bundle.require_complete();
  const auto split = split_indices(raw.size(), bundle.test_fraction, bundle.split_seed);
  const Dataset train_raw = raw.subset(split.train);
  const Dataset test_raw = raw.subset(split.test);

  Evaluation ev;
  ev.test_indices = split.test;
  ev.labels = test_raw.labels();
  const auto channel = raw.find_feature(cfg.eval.bi_channel);
  if (!channel) throw ArgumentError("dataset has no channel named '" + cfg.eval.bi_channel + "' for the BI baseline");
  ev.bi = baseline_bi(test_raw, *channel);
  ev.predictions = predict_all(bundle, prepare_inputs(bundle, test_raw));

  ev.rows.push_back(score("BI", ev.bi, ev.labels));
  ev.rows.push_back(score("LR", baseline_lr(train_raw, test_raw), ev.labels));
  if (!ev.predictions.sra.empty()) ev.rows.push_back(score("SRA", ev.predictions.sra, ev.labels));
  ev.rows.push_back(score("OBA", ev.predictions.oba, ev.labels));
  return ev;
}

std::vector<AblationPoint> ablate(const Dataset& raw, const RunConfig& cfg, std::uint64_t seed, const std::string& param,
                                  const std::vector<double>& values) {
  if (param != "sigma" && param != "eta") throw ArgumentError("unknown ablation parameter '" + param + "' (expected sigma or eta)");
  if (values.empty()) throw ArgumentError("ablation needs at least one value");
  if (param == "sigma" && std::find(values.begin(), values.end(), 0.0) == values.end())
    throw ArgumentError("sigma ablation must include 0 (the plain autoencoder reference)");

  std::vector<AblationPoint> out;
  std::optional<ResidualHead> selector;
  for (double v : values) {
    RunConfig c = cfg;
    if (param == "sigma") {
      if (v < 0) throw ArgumentError("sigma must be non-negative");
      c.train.sigma = v;
    } else {
      if (!(v > 0) || v > c.gen.y_max) throw ArgumentError("eta " + text::format_double(v) + " outside (0, y_max]");
      c.ordinal.eta = v;
    }
    TrainRequest req;
    req.seed = seed;
    req.with_sra = false;
    req.with_selector = !selector;
    auto trained = train_pipeline(raw, c, req);
    if (selector)
      trained.bundle.selector = selector;
    else
      selector = trained.bundle.selector;
    auto ev = evaluate_bundle(raw, trained.bundle, c);
    out.push_back({param, v, ev.rows.back()});
  }
  return out;
}

std::string format_ablation(const std::vector<AblationPoint>& points) {
  std::ostringstream out;
  out << "param,value,mae,mpae,ts_0.1,ts_1,ts_10\n";
  for (const auto& p : points) {
    out << p.param << ',' << text::format_double(p.value) << ',' << text::fixed6(p.metrics.mae) << ',' << text::fixed6(p.metrics.mpae);
    for (const auto& t : p.metrics.ts) out << ',' << (t ? text::fixed6(*t) : "-");
    out << '\n';
  }
  return out.str();
}

std::string format_curves(const std::map<std::string, LossCurve>& curves) {
  std::ostringstream out;
  out << "component,epoch,loss\n";
  for (const auto& [name, curve] : curves)
    for (std::size_t e = 0; e < curve.size(); ++e) out << name << ',' << e + 1 << ',' << text::format_double(curve[e]) << '\n';
  return out.str();
}

}  // namespace oba
