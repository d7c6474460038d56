// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "oba/binio.hpp"
#include "oba/cli.hpp"
#include "oba/config.hpp"
#include "oba/eval.hpp"
#include "oba/grad_check.hpp"
#include "oba/layers.hpp"
#include "oba/models.hpp"
#include "oba/pipeline.hpp"
#include "oba/ordinal.hpp"
#include "oba/random.hpp"
#include "oba/synthgen.hpp"
#include "oba/plot.hpp"
#include "oba/text.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace oba;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

int oba_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "oba");
  return cli::run(args);
}

void require_ok(int code, const std::string& what) {
  if (code != 0) throw std::runtime_error(what + " exited with code " + std::to_string(code));
}

std::map<std::string, MetricRow> read_report(const fs::path& path) {
  std::map<std::string, MetricRow> rows;
  std::istringstream in(binio::read_file(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = text::split(line, ',');
    if (f.size() != 6) continue;
    MetricRow r{f[0], *text::parse_double(f[1]), *text::parse_double(f[2]), {}};
    for (int i = 0; i < 3; ++i) r.ts[static_cast<std::size_t>(i)] = text::parse_double(f[static_cast<std::size_t>(3 + i)]);
    rows[r.method] = r;
  }
  return rows;
}

std::map<std::string, std::string> read_dir(const fs::path& dir, const std::vector<std::string>& skip = {}) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (std::find(skip.begin(), skip.end(), name) == skip.end()) files[name] = binio::read_file(e.path());
  }
  return files;
}

// 1 ---------------------------------------------------------------------------

double project(const Tensord& out, const Tensord& r) { return out.values().dot(r.values()); }

// Central differences are exact on quadratic losses, so a wide step only
// shrinks round-off.
constexpr double kQuadraticStep = 1e-4;

// Conv biases feeding batch norm have an exactly zero gradient, so whole
// networks are compared against max(|a|, |n|, 1e-5). Step 1e-5: at 1e-6
// round-off alone reaches 1e-5 relative on gradients of that size.
template <typename F>
double network_check(F&& f, Tensord& point, const Tensord& analytic) {
  double worst = 0.0;
  for (Index i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + 1e-5;
    const double up = f();
    point[i] = saved - 1e-5;
    const double down = f();
    point[i] = saved;
    const double num = (up - down) / 2e-5, ana = analytic[i];
    worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-5}));
  }
  return worst;
}

struct Worst {
  double error = 0.0;
  std::string where;
};

Worst gradient_suite_for_seed(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Worst worst;
  auto track = [&](double e, const std::string& where) {
    if (e > worst.error) worst = {e, where + ", seed " + std::to_string(seed)};
  };

  {
    Tensord x = oracle::random_tensor({2, 3, 6, 5}, rng), w = oracle::random_tensor({4, 3, 3, 3}, rng), b = oracle::random_tensor({4}, rng);
    const ConvGeometry g{2, 1};
    const Tensord r = oracle::random_tensor(conv2d(x, w, b, g).shape(), rng);
    const auto gr = conv2d_backward(x, w, r, g);
    auto f = [&] { return project(conv2d(x, w, b, g), r); };
    track(grad_check(f, x, gr.input), "conv input");
    track(grad_check(f, w, gr.weights), "conv weights");
    track(grad_check(f, b, gr.bias), "conv bias");
  }
  {
    Tensord x = oracle::random_tensor({3, 2, 3, 3}, rng, -2, 2), s = oracle::random_tensor({2}, rng, 0.5, 1.5), t = oracle::random_tensor({2}, rng);
    const Tensord r = oracle::random_tensor(x.shape(), rng);
    RunningStats<double> rs;
    BatchNormCache<double> cache;
    batch_norm(x, s, t, rs, Mode::Train, {}, &cache);
    const auto gr = batch_norm_backward(cache, s, r);
    auto f = [&] {
      RunningStats<double> scratch;
      return project(batch_norm(x, s, t, scratch, Mode::Train), r);
    };
    track(grad_check(f, x, gr.input), "batch norm input");
    track(grad_check(f, s, gr.scale), "batch norm scale");
    track(grad_check(f, t, gr.shift), "batch norm shift");
  }
  {
    Tensord x = oracle::random_tensor({40}, rng);
    for (Index i = 0; i < x.size(); ++i)
      if (std::abs(x[i]) < 0.05) x[i] = 0.5;
    const Tensord r = oracle::random_tensor(x.shape(), rng);
    track(grad_check([&] { return project(leaky_relu(x, 0.01), r); }, x, leaky_relu_backward(x, r, 0.01)), "leaky relu");
  }
  {
    Tensord x = oracle::random_tensor({2, 3, 4, 5}, rng);
    const Tensord r = oracle::random_tensor({2, 3, 7, 9}, rng);
    track(grad_check([&] { return project(bilinear_upsample(x, 7, 9), r); }, x, bilinear_upsample_backward(x.shape(), r)), "bilinear");
  }
  {
    Tensord x = oracle::random_tensor({2, 3, 4, 4}, rng);
    const Tensord r = oracle::random_tensor({2, 3}, rng);
    track(grad_check([&] { return project(global_avg_pool(x), r); }, x, global_avg_pool_backward(x.shape(), r)), "avg pool");
  }
  {
    Tensord x = oracle::random_tensor({3, 5}, rng), w = oracle::random_tensor({2, 5}, rng), b = oracle::random_tensor({2}, rng);
    const Tensord r = oracle::random_tensor({3, 2}, rng);
    const auto gr = fully_connected_backward(x, w, r);
    auto f = [&] { return project(fully_connected(x, w, b), r); };
    track(grad_check(f, x, gr.input), "fc input");
    track(grad_check(f, w, gr.weights), "fc weights");
    track(grad_check(f, b, gr.bias), "fc bias");
  }
  {
    Tensord x = oracle::random_tensor({30}, rng);
    const Tensord r = oracle::random_tensor(x.shape(), rng);
    const std::uint64_t mask_seed = rng();
    std::mt19937_64 m(mask_seed);
    const auto fwd = dropout(x, 0.3, Mode::Train, m);
    auto f = [&] {
      std::mt19937_64 again(mask_seed);
      return project(dropout(x, 0.3, Mode::Train, again).output, r);
    };
    track(grad_check(f, x, dropout_backward(fwd.mask, r)), "dropout");
  }
  {
    const Tensord x = oracle::random_tensor({2, 3, 4, 4}, rng);
    Tensord xh = oracle::random_tensor(x.shape(), rng);
    track(grad_check([&] { return reconstruction_loss(x, xh).loss; }, xh, reconstruction_loss(x, xh).grad, kQuadraticStep), "reconstruction loss");
  }
  {
    Tensord p = oracle::random_tensor({4, 5}, rng, 0.05, 0.95);
    Tensord d({4, 5});
    for (Index i = 0; i < d.size(); ++i) d[i] = double(rng() & 1);
    const FocalParams fp{2.0, {0.2, 0.4, 0.5, 0.7, 0.9}};
    track(grad_check([&] { return focal_ordinal_loss(p, d, fp).loss; }, p, focal_ordinal_loss(p, d, fp).grad), "focal loss");
  }
  {
    Tensord pred = oracle::random_tensor({6, 1}, rng, 0.0, 5.0);
    const std::vector<double> y = {0.3, 1.2, 4.4, 0.1, 2.5, 3.3};
    track(grad_check([&] { return least_squares_loss(pred, y).loss; }, pred, least_squares_loss(pred, y).grad, kQuadraticStep), "least squares loss");
  }
  {
    Tensord logits = oracle::random_tensor({8, 1}, rng, -4.0, 4.0);
    std::vector<double> t;
    for (int i = 0; i < 8; ++i) t.push_back(i % 3 == 0 ? 1.0 : 0.0);
    track(grad_check([&] { return bce_with_logits(logits, t).loss; }, logits, bce_with_logits(logits, t).grad), "bce loss");
  }
  {
    ResidualHead head("head", 3, {{4, 3, 2}, {4, 3, 1}}, 4, 0.2, seed);
    Tensord x = oracle::random_tensor({3, 3, 7, 7}, rng);
    const Tensord r = oracle::random_tensor({3, 1}, rng);
    const std::uint64_t mask_seed = rng();
    auto f = [&] {
      Rng again(mask_seed);
      return project(head.forward(x, Mode::Train, &again), r);
    };
    f();
    const Tensord gx = head.backward(r);
    for (Parameter* p : head.parameters()) p->zero_grad();
    f();
    head.backward(r);
    track(network_check(f, x, gx), "residual head input");
    for (Parameter* p : head.parameters()) track(network_check(f, p->value, p->grad), p->name);
  }
  return worst;
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  Worst worst;
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    const Worst w = gradient_suite_for_seed(seed);
    if (w.error > worst.error) worst = w;
  }
  const double secs = seconds_since(t0);
  return {worst.error <= 1e-5 && secs < 60.0,
          "max relative error " + fmt(worst.error) + " (" + worst.where + ") over 3 seeds, " + fmt(secs, 3) + " s"};
}

// 2 ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Index> dim(1, 4), size(3, 9), stride(1, 2), pad(0, 1), kernel(0, 1);
  double conv = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = kernel(rng) ? 3 : 1;
    const Index B = dim(rng), C = dim(rng), O = dim(rng), H = size(rng), W = size(rng);
    const ConvGeometry g{stride(rng), pad(rng)};
    const Tensord x = oracle::random_tensor({B, C, H, W}, rng), w = oracle::random_tensor({O, C, k, k}, rng), b = oracle::random_tensor({O}, rng);
    conv = std::max(conv, oracle::max_abs_diff(conv2d(x, w, b, g), oracle::conv2d(x, w, b, g.stride, g.padding)));
  }
  const Tensord x = oracle::random_tensor({5, 7}, rng), w = oracle::random_tensor({3, 7}, rng), b = oracle::random_tensor({3}, rng);
  const double fc = oracle::max_abs_diff(fully_connected(x, w, b), oracle::fully_connected(x, w, b));
  const Tensord g = oracle::random_tensor({3, 9, 9}, rng);
  const double bil = std::max(oracle::max_abs_diff(bilinear_upsample(g, 17, 17), oracle::bilinear(g, 17, 17)),
                              oracle::max_abs_diff(bilinear_upsample(g, 12, 20), oracle::bilinear(g, 12, 20)));
  return {conv <= 1e-12 && fc <= 1e-12 && bil <= 1e-12, "conv " + fmt(conv) + " (50 configs), fc " + fmt(fc) + ", bilinear " + fmt(bil)};
}

// 3 ---------------------------------------------------------------------------

Outcome ordinal_roundtrip() {
  std::mt19937_64 rng(2024);
  int bad_range = 0, bad_floor = 0;
  for (const double eta : {0.5, 0.3, 1.0}) {
    const RankPartition p(eta, 25.0);
    std::uniform_real_distribution<double> u(0.0, 25.0);
    for (int i = 0; i < 1000; ++i) {
      double y = u(rng);
      if (y == 0.0) y = 25.0;
      const auto d = encode(y, p);
      const double count = double(std::count(d.begin(), d.end(), 1));
      for (const auto mode : {DecodeMode::Sum, DecodeMode::Prefix}) {
        const double v = decode(std::vector<double>(d.begin(), d.end()), p, 0.5, mode);
        bad_range += !(v >= y - eta && v <= y);
        bad_floor += v != eta * std::floor(count);
      }
    }
  }
  return {bad_range == 0 && bad_floor == 0, "1000 labels x eta {0.5, 0.3, 1} x {sum, prefix}: " + std::to_string(bad_range) +
                                                " outside [y - eta, y], " + std::to_string(bad_floor) + " floor mismatches"};
}

// 4 ---------------------------------------------------------------------------

Outcome focal_identity() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Tensord p = oracle::random_tensor({8, 6}, rng, 0.01, 0.99);
    Tensord d({8, 6});
    double bce = 0.0;
    for (Index i = 0; i < d.size(); ++i) {
      d[i] = double(rng() & 1);
      bce -= d[i] * std::log(p[i]) + (1 - d[i]) * std::log(1 - p[i]);
    }
    bce /= double(d.size());
    worst = std::max(worst, std::abs(focal_ordinal_loss(p, d, {0.0, std::vector<double>(6, 0.5)}).loss - 0.5 * bce));
  }
  const double hand = focal_ordinal_loss(oracle::values({1, 1}, {0.3}), oracle::values({1, 1}, {1.0}), {2.0, {0.25}}).loss;
  return {worst <= 1e-12 && std::abs(hand - 0.14748) <= 1e-5, "gamma=0 identity error " + fmt(worst) + ", hand case " + fmt(hand, 8)};
}

// 5 ---------------------------------------------------------------------------

Outcome metric_oracles() {
  const std::vector<double> p = {0.0, 0.05, 0.2, 1.5, 0.0, 12.0, 3.0, 0.0, 9.0, 0.1};
  const std::vector<double> y = {0.0, 0.0, 0.3, 0.8, 2.0, 15.0, 0.0, 0.1, 11.0, 0.0};
  bool ok = contingency(p, y, 0.1) == ContingencyTable{4, 2, 2, 2} && contingency(p, y, 1.0) == ContingencyTable{2, 2, 1, 5} &&
            contingency(p, y, 10.0) == ContingencyTable{1, 0, 1, 8};
  const auto r = score("t", p, y);
  ok = ok && *r.ts[0] == 0.5 && *r.ts[1] == 0.4 && *r.ts[2] == 0.5;
  ok = ok && std::abs(r.mae - 1.105) < 1e-15 && std::abs(r.mpae - 7.9 / 6.0) < 1e-15;
  const std::vector<double> zeros(4, 0.0);
  ok = ok && !ts_score(contingency(zeros, zeros, 0.1)).has_value();
  ok = ok && mae({1, 1}, {0, 2}) == 1.0 && mpae({1, 1}, {0, 2}) == 1.0 && *ts_score(contingency({0.5, 0, 2}, {0.6, 0, 0}, 0.1)) == 0.5;
  return {ok, "10-pair table: Ts " + fmt(*r.ts[0]) + "/" + fmt(*r.ts[1]) + "/" + fmt(*r.ts[2]) + ", MAE " + fmt(r.mae) + ", MPAE " + fmt(r.mpae) +
                  ", undefined Ts reported as missing"};
}

// 6, 8, 9 -----------------------------------------------------------------------

struct EndToEnd {
  fs::path data, model, report;
  double seconds = 0.0;
};

EndToEnd run_end_to_end(const fs::path& work, const fs::path& desk) {
  EndToEnd e{work / "default.obads", work / "default_model", work / "default_report.csv"};
  fs::remove_all(e.model);
  const auto t0 = Clock::now();
  require_ok(oba_cli({"gen", "--out", e.data.string(), "--seed", "7", "--n", "5000"}), "gen");
  require_ok(oba_cli({"train", "--config", desk.string(), "--data", e.data.string(), "--out", e.model.string(), "--seed", "7"}), "train");
  require_ok(oba_cli({"eval", "--data", e.data.string(), "--model", e.model.string(), "--report", e.report.string()}), "eval");
  e.seconds = seconds_since(t0);
  return e;
}

Outcome end_to_end_ordering(const EndToEnd& e) {
  auto rows = read_report(e.report);
  const auto &oba = rows.at("OBA"), &sra = rows.at("SRA"), &bi = rows.at("BI");
  const bool ok = oba.mae < sra.mae && oba.mae < bi.mae && oba.ts[0].value_or(-1) >= sra.ts[0].value_or(2) && e.seconds <= 600.0;
  return {ok, "MAE OBA " + fmt(oba.mae) + " SRA " + fmt(sra.mae) + " BI " + fmt(bi.mae) + " LR " + fmt(rows.at("LR").mae) + "; Ts0.1 OBA " +
                  fmt(oba.ts[0].value_or(-1)) + " SRA " + fmt(sra.ts[0].value_or(-1)) + "; gen+train+eval " + fmt(e.seconds, 4) + " s"};
}

Outcome selector_quality(const EndToEnd& e) {
  const Dataset raw = read_dataset(e.data);
  ModelBundle b = load_bundle(e.model);
  const auto split = split_indices(raw.size(), b.test_fraction, b.split_seed);
  const Dataset test = raw.subset(split.test);
  const auto prob = selector_probabilities(*b.selector, prepare_inputs(b, test));
  Index correct = 0;
  for (Index i = 0; i < test.size(); ++i) correct += (prob[static_cast<std::size_t>(i)] >= 0.5) == (test.samples[static_cast<std::size_t>(i)].label > 0.0);
  const double acc = double(correct) / double(test.size());
  const auto preds = predict(b, prepare_inputs(b, raw));
  Index bad = 0;
  for (double v : preds) bad += !(v == 0.0 || v >= b.partition.eta());
  return {acc >= 0.9 && bad == 0, "held-out accuracy " + fmt(acc) + "; " + std::to_string(bad) + " of " + std::to_string(preds.size()) +
                                      " predictions neither 0 nor >= eta"};
}

Outcome serialization(const EndToEnd& e, const fs::path& work) {
  const std::string bytes = binio::read_file(e.data);
  const bool dataset_ok = encode_dataset(decode_dataset(bytes)) == bytes;
  ModelBundle original = load_bundle(e.model);
  const fs::path copy = work / "bundle_copy";
  fs::remove_all(copy);
  save_bundle(original, copy);
  const auto a = read_dir(e.model, {"run_manifest.txt", "losses_all.csv"}), b = read_dir(copy);
  const bool bundle_ok = a == b;

  GenConfig probe;
  probe.seed = 4242;
  probe.n_samples = 64;
  const Dataset raw = generate_dataset(probe);
  ModelBundle reloaded = load_bundle(copy);
  const auto p1 = predict_all(original, prepare_inputs(original, raw));
  const auto p2 = predict_all(reloaded, prepare_inputs(reloaded, raw));
  const bool probe_ok = p1.oba == p2.oba && p1.sra == p2.sra && p1.rain_probability == p2.rain_probability;
  return {dataset_ok && bundle_ok && probe_ok, std::string("OBADS001 ") + (dataset_ok ? "identical" : "differs") + ", bundle (" +
                                                   std::to_string(a.size()) + " files) " + (bundle_ok ? "identical" : "differs") +
                                                   ", 64-sample probe " + (probe_ok ? "bit-exact" : "differs")};
}

// 7 ---------------------------------------------------------------------------

Outcome sigma_ablation(const fs::path& work, const fs::path& desk, const std::string& samples) {
  const fs::path data = work / "ablation.obads", csv = work / "ablation_sigma.csv", svg = work / "ablation_sigma.svg";
  const auto t0 = Clock::now();
  require_ok(oba_cli({"gen", "--out", data.string(), "--seed", "7", "--n", samples}), "gen");
  require_ok(oba_cli({"ablate", "--config", desk.string(), "--data", data.string(), "--param", "sigma", "--values", "0,0.01,0.05,0.2",
                      "--report", csv.string(), "--seed", "7"}),
             "ablate");
  require_ok(oba_cli({"plot", "--kind", "ablation", "--input", csv.string(), "--out", svg.string()}), "plot");
  const auto points = plot::read_ablation_csv(binio::read_file(csv));
  if (points.size() != 4) return {false, "expected 4 ablation rows, got " + std::to_string(points.size())};
  std::string trend;
  for (std::size_t i = 0; i < points.size(); ++i) trend += (i ? ", " : "") + fmt(points[i].x) + " -> " + fmt(points[i].y);
  const bool emitted = fs::exists(svg) && binio::read_file(svg).find("<polyline") != std::string::npos;
  return {emitted && points[1].y <= points[0].y, "MAE by sigma: " + trend + " (" + samples + " samples, " + fmt(seconds_since(t0), 4) + " s)"};
}

// 10 --------------------------------------------------------------------------

Outcome calibration() {
  const GenConfig cfg;
  const int n = 100000;
  int dry = 0, heavy = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng(stream_seed(7, static_cast<std::uint64_t>(i)));
    const double y = sample_label(rng, cfg);
    dry += y == 0.0;
    heavy += y > 10.0;
  }
  const double p_dry = double(dry) / n, p_heavy = double(heavy) / n;
  return {std::abs(p_dry - 0.6) <= 0.02 && std::abs(p_heavy - 0.01) <= 0.005, "dry fraction " + fmt(p_dry) + ", P(y > 10) " + fmt(p_heavy)};
}

// 11 --------------------------------------------------------------------------

// The echoed config records the thread count it was trained with.
std::string without_threads(const std::string& cfg) {
  std::istringstream in(cfg);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (text::trim(line).rfind("threads", 0) != 0) out += line + '\n';
  return out;
}

Outcome determinism(const fs::path& work, const fs::path& desk) {
  const fs::path cfg = work / "determinism.cfg";
  binio::write_file(cfg, binio::read_file(desk) + "\n[train]\nepochs_eda = 2\nepochs_ord = 2\nepochs_sel = 2\nepochs_sra = 2\n");
  const std::string c = cfg.string();
  std::vector<std::string> mismatches;

  require_ok(oba_cli({"gen", "--out", (work / "det_a.obads").string(), "--seed", "11", "--n", "600"}), "gen");
  require_ok(oba_cli({"gen", "--out", (work / "det_b.obads").string(), "--seed", "11", "--n", "600"}), "gen");
  if (binio::read_file(work / "det_a.obads") != binio::read_file(work / "det_b.obads")) mismatches.push_back("gen");

  const std::string data = (work / "det_a.obads").string();
  std::vector<std::map<std::string, std::string>> bundles;
  for (const std::string threads : {"1", "1", "4"}) {
    const fs::path out = work / ("det_model_" + std::to_string(bundles.size()));
    fs::remove_all(out);
    require_ok(oba_cli({"train", "--config", c, "--data", data, "--out", out.string(), "--seed", "5", "--threads", threads}), "train");
    auto files = read_dir(out, {"run_manifest.txt"});
    files["config.cfg"] = without_threads(files["config.cfg"]);
    bundles.push_back(std::move(files));
  }
  if (bundles[0] != bundles[1]) mismatches.push_back("train rerun");
  if (bundles[0] != bundles[2]) mismatches.push_back("train with 4 threads");

  std::vector<std::string> reports;
  for (int i = 0; i < 2; ++i) {
    const fs::path r = work / ("det_report_" + std::to_string(i) + ".csv");
    require_ok(oba_cli({"eval", "--data", data, "--model", (work / "det_model_0").string(), "--report", r.string()}), "eval");
    reports.push_back(binio::read_file(r));
  }
  if (reports[0] != reports[1]) mismatches.push_back("eval");

  std::string detail = "gen, train (threads 1, 1, 4) and eval reruns ";
  if (mismatches.empty()) return {true, detail + "byte-identical (" + std::to_string(bundles[0].size()) + " bundle files)"};
  for (const auto& m : mismatches) detail += "[" + m + " differs]";
  return {false, detail};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "oba_acceptance";
  fs::path desk = "configs/desk.cfg";
  std::string ablation_samples = "2000";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--workdir")
      work = argv[i + 1];
    else if (flag == "--desk-config")
      desk = argv[i + 1];
    else if (flag == "--ablation-samples")
      ablation_samples = argv[i + 1];
    else {
      std::cerr << "usage: acceptance [--workdir DIR] [--desk-config FILE] [--ablation-samples N]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
  };

  report(1, "gradient suite", gradient_suite);
  report(2, "oracle equivalence", oracle_equivalence);
  report(3, "ordinal roundtrip", ordinal_roundtrip);
  report(4, "focal reduction identity", focal_identity);
  report(5, "metric oracles", metric_oracles);

  std::optional<EndToEnd> e2e;
  std::string e2e_error;
  try {
    e2e = run_end_to_end(work, desk);
  } catch (const std::exception& ex) {
    e2e_error = ex.what();
  }
  auto needs_e2e = [&](const std::function<Outcome(const EndToEnd&)>& f) {
    return [&, f]() -> Outcome {
      if (!e2e) return {false, "end-to-end run failed: " + e2e_error};
      return f(*e2e);
    };
  };
  report(6, "end-to-end ordering", needs_e2e(end_to_end_ordering));
  report(7, "sigma ablation", [&] { return sigma_ablation(work, desk, ablation_samples); });
  report(8, "selector quality", needs_e2e(selector_quality));
  report(9, "serialization", needs_e2e([&](const EndToEnd& e) { return serialization(e, work); }));
  report(10, "synthgen calibration", calibration);
  report(11, "determinism", [&] { return determinism(work, desk); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
