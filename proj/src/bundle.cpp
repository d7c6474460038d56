#include <fstream>
#include <map>
#include <sstream>

#include "oba/binio.hpp"
#include "oba/models.hpp"
#include "oba/text.hpp"

namespace oba {

namespace {

constexpr std::string_view kBundleFormat = "OBA-BUNDLE-1";

using Visit = std::function<void(const StateVisitor&)>;

void restore_state(const Visit& visit, const std::vector<NamedTensor>& entries, const std::string& component) {
  std::map<std::string, const Tensord*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e.tensor;
  std::size_t used = 0;
  visit([&](const std::string& name, Tensord& t) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw FormatError(FormatError::Kind::ShapeInconsistency, component + ": weight '" + name + "' missing from file");
    if (it->second->shape() != t.shape())
      throw FormatError(FormatError::Kind::ShapeInconsistency, component + ": weight '" + name + "' has shape " +
                                                                   shape_string(it->second->shape()) + ", expected " + shape_string(t.shape()));
    t = *it->second;
    ++used;
  });
  if (used != entries.size()) throw FormatError(FormatError::Kind::ShapeInconsistency, component + ": file holds unexpected extra weights");
}

std::vector<NamedTensor> read_component(const std::filesystem::path& dir, const std::string& file, const std::string& component) {
  if (!std::filesystem::exists(dir / file)) throw FormatError(FormatError::Kind::MissingComponent, "missing component: " + component);
  return read_weights(dir / file);
}

std::string join_indices(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

std::vector<NamedTensor> collect_state(const Visit& visit) {
  std::vector<NamedTensor> out;
  visit([&](const std::string& name, Tensord& t) { out.push_back({name, t}); });
  return out;
}

void save_bundle(const ModelBundle& bundle_in, const std::filesystem::path& dir) {
  auto& bundle = const_cast<ModelBundle&>(bundle_in);
  std::filesystem::create_directories(dir);

  std::vector<std::string> components;
  if (bundle.eda) {
    write_weights(dir / "eda.obawt", collect_state([&](const StateVisitor& f) { bundle.eda->visit(f); }));
    components.push_back("eda");
  }
  for (std::size_t k = 0; k < bundle.subnets.size(); ++k)
    write_weights(dir / ("subnet_" + std::to_string(k + 1) + ".obawt"), collect_state([&](const StateVisitor& f) { bundle.subnets[k].visit(f); }));
  if (!bundle.subnets.empty()) components.push_back("subnets");
  if (bundle.selector) {
    write_weights(dir / "selector.obawt", collect_state([&](const StateVisitor& f) { bundle.selector->visit(f); }));
    components.push_back("selector");
  }
  if (bundle.sra) {
    write_weights(dir / "sra.obawt", collect_state([&](const StateVisitor& f) { bundle.sra->visit(f); }));
    components.push_back("sra");
  }
  write_weights(dir / "stats.obawt", {{"mean", Tensord({bundle.stats.size()}, bundle.stats.mean)},
                                      {"stddev", Tensord({bundle.stats.size()}, bundle.stats.stddev)}});

  std::ostringstream m;
  m << "format = " << kBundleFormat << '\n'
    << "arch = " << bundle.arch.name << '\n'
    << "channels = " << bundle.channels << '\n'
    << "grid = " << bundle.grid << '\n'
    << "features = " << join_indices(bundle.features) << '\n'
    << "eta = " << text::format_double(bundle.partition.eta()) << '\n'
    << "y_max = " << text::format_double(bundle.partition.y_max()) << '\n'
    << "k_minus_1 = " << bundle.partition.size() << '\n'
    << "xi = " << text::format_double(bundle.xi) << '\n'
    << "decode = " << (bundle.decode == DecodeMode::Sum ? "sum" : "prefix") << '\n'
    << "sigma = " << text::format_double(bundle.noise.sigma) << '\n'
    << "mu = " << text::format_double(bundle.noise.mu) << '\n'
    << "split_seed = " << bundle.split_seed << '\n'
    << "test_fraction = " << text::format_double(bundle.test_fraction) << '\n'
    << "stats = stats.obawt\n"
    << "components = ";
  for (std::size_t i = 0; i < components.size(); ++i) m << (i ? "," : "") << components[i];
  m << '\n';
  binio::write_file(dir / "manifest.txt", m.str());
  if (!bundle.config_echo.empty()) binio::write_file(dir / "config.cfg", bundle.config_echo);
}

ModelBundle load_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.txt"))
    throw FormatError(FormatError::Kind::MissingComponent, "missing component: manifest (" + (dir / "manifest.txt").string() + ")");
  std::map<std::string, std::string> kv;
  std::istringstream in(binio::read_file(dir / "manifest.txt"));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[std::string(text::trim(std::string_view(line).substr(0, eq)))] = std::string(text::trim(std::string_view(line).substr(eq + 1)));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(FormatError::Kind::ShapeInconsistency, "bundle manifest lacks key '" + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key) {
    auto v = text::parse_double(get(key));
    if (!v) throw FormatError(FormatError::Kind::ShapeInconsistency, "bundle manifest: bad number for '" + key + "'");
    return *v;
  };
  if (get("format") != kBundleFormat)
    throw FormatError(FormatError::Kind::VersionMismatch, "bundle format '" + get("format") + "' is not " + std::string(kBundleFormat));

  ModelBundle b;
  b.arch = Architecture::by_name(get("arch"));
  b.channels = static_cast<Index>(num("channels"));
  b.grid = static_cast<Index>(num("grid"));
  for (const auto& tok : text::split(get("features"), ','))
    if (!tok.empty()) b.features.push_back(static_cast<Index>(*text::parse_int(tok)));
  b.partition = RankPartition(num("eta"), num("y_max"));
  if (static_cast<Index>(num("k_minus_1")) != b.partition.size())
    throw FormatError(FormatError::Kind::ShapeInconsistency, "bundle manifest: k_minus_1 disagrees with eta and y_max");
  b.xi = num("xi");
  b.decode = get("decode") == "prefix" ? DecodeMode::Prefix : DecodeMode::Sum;
  b.noise = {num("mu"), num("sigma")};
  b.split_seed = *text::parse_uint(get("split_seed"));
  b.test_fraction = num("test_fraction");

  const auto stats = read_component(dir, get("stats"), "stats");
  if (stats.size() != 2 || stats[0].name != "mean" || stats[1].name != "stddev")
    throw FormatError(FormatError::Kind::ShapeInconsistency, "stats file must hold 'mean' and 'stddev'");
  b.stats = {stats[0].tensor.values(), stats[1].tensor.values()};

  std::vector<std::string> components;
  for (const auto& c : text::split(get("components"), ','))
    if (!c.empty()) components.push_back(c);
  auto has = [&](const std::string& c) { return std::find(components.begin(), components.end(), c) != components.end(); };

  if (has("eda")) {
    b.eda.emplace(b.arch, b.channels, b.grid, 0);
    restore_state([&](const StateVisitor& f) { b.eda->visit(f); }, read_component(dir, "eda.obawt", "eda"), "eda");
  }
  if (has("subnets"))
    for (Index k = 0; k < b.partition.size(); ++k) {
      b.subnets.push_back(make_subnet(b.arch, k, 0));
      const std::string file = "subnet_" + std::to_string(k + 1) + ".obawt";
      restore_state([&](const StateVisitor& f) { b.subnets.back().visit(f); }, read_component(dir, file, "subnet_" + std::to_string(k + 1)), file);
    }
  if (has("selector")) {
    b.selector.emplace(make_selector(b.arch, b.channels, 0));
    restore_state([&](const StateVisitor& f) { b.selector->visit(f); }, read_component(dir, "selector.obawt", "selector"), "selector");
  }
  if (has("sra")) {
    b.sra.emplace(make_sra(b.arch, 0));
    restore_state([&](const StateVisitor& f) { b.sra->visit(f); }, read_component(dir, "sra.obawt", "sra"), "sra");
  }
  if (std::filesystem::exists(dir / "config.cfg")) b.config_echo = binio::read_file(dir / "config.cfg");
  return b;
}

}  // namespace oba
