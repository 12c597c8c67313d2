#include "nlnl/config.hpp"

#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nlnl/error.hpp"
#include "nlnl/io.hpp"

namespace nlnl {

namespace pt = boost::property_tree;

PseudoLabelConfig ExperimentConfig::default_pseudo() {
  PseudoLabelConfig p;
  p.clean_train = PhaseConfig{PhaseKind::PseudoCleanTrain, 50, 0.1};
  p.clean_train.decay_epochs = {20, 30};
  p.clean_train.decay_factor = 0.1;
  p.final_train = p.clean_train;
  p.final_train.kind = PhaseKind::PseudoFinalTrain;
  return p;
}

namespace {

PhaseConfig with_optimizer(PhaseConfig p, const ExperimentConfig& c) {
  p.momentum = c.momentum;
  p.weight_decay = c.weight_decay;
  p.batch_size = c.batch_size;
  p.gamma = c.gamma;
  p.complementary_labels = c.complementary_labels;
  return p;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"seed", "out"}},
      {"dataset",
       {"kind", "classes", "per_class", "dim", "separation", "test_fraction", "train_images", "train_labels",
        "test_images", "test_labels", "limit"}},
      {"noise", {"kind", "ratio", "map", "exact_count"}},
      {"network", {"hidden"}},
      {"optimizer", {"momentum", "weight_decay", "batch_size"}},
      {"selnlpl", {"phases", "gamma", "complementary_labels"}},
      {"nl", {"epochs", "lr"}},
      {"selnl", {"epochs", "lr"}},
      {"selpl", {"epochs", "lr"}},
      {"pseudo", {"enabled", "epochs", "lr", "decay_at", "decay_factor"}},
      {"baseline", {"enabled", "epochs", "lr"}},
      {"report", {"histogram_bins"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Strips trailing "; comment" / "# comment" from values.
std::string value_text(const std::string& raw) {
  std::string v = raw;
  for (char marker : {';', '#'}) {
    const auto pos = v.find(marker);
    if (pos != std::string::npos) v = v.substr(0, pos);
  }
  return trim(v);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& root) : root_(root) {}

  const pt::ptree* section(const std::string& name) const {
    if (name.empty()) return &root_;
    auto it = root_.find(name);
    return it == root_.not_found() ? nullptr : &it->second;
  }

  std::optional<std::string> get(const std::string& sec, const std::string& key) const {
    const pt::ptree* s = section(sec);
    if (!s) return std::nullopt;
    auto it = s->find(key);
    if (it == s->not_found() || !it->second.empty()) return std::nullopt;
    return value_text(it->second.data());
  }

  static std::string field(const std::string& sec, const std::string& key) {
    return sec.empty() ? key : sec + "." + key;
  }

  void read(const std::string& sec, const std::string& key, double& out) const {
    if (auto v = get(sec, key)) {
      try {
        out = io::parse_double(*v);
      } catch (const ParseError&) {
        throw ConfigError(field(sec, key), "expected a number, got '" + *v + "'");
      }
    }
  }

  void read(const std::string& sec, const std::string& key, std::size_t& out) const {
    if (auto v = get(sec, key)) out = parse_count(*v, field(sec, key));
  }

  void read(const std::string& sec, const std::string& key, std::string& out) const {
    if (auto v = get(sec, key)) out = *v;
  }

  void read(const std::string& sec, const std::string& key, bool& out) const {
    if (auto v = get(sec, key)) {
      if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") out = true;
      else if (*v == "false" || *v == "0" || *v == "no" || *v == "off") out = false;
      else throw ConfigError(field(sec, key), "expected true/false, got '" + *v + "'");
    }
  }

  void read_list(const std::string& sec, const std::string& key, std::vector<std::size_t>& out) const {
    if (auto v = get(sec, key)) {
      out.clear();
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_count(item, field(sec, key)));
      }
    }
  }

  static std::size_t parse_count(const std::string& v, const std::string& f) {
    std::size_t pos = 0;
    unsigned long long n = 0;
    try {
      if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
      n = std::stoull(v, &pos);
    } catch (const std::exception&) {
      throw ConfigError(f, "expected a non-negative integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(f, "expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(n);
  }

 private:
  const pt::ptree& root_;
};

void check_schema(const pt::ptree& root) {
  const auto& s = schema();
  for (const auto& [name, node] : root) {
    if (node.empty()) {
      if (!s.at("").count(name)) throw ConfigError(name, "unknown top-level key");
      continue;
    }
    auto sec = s.find(name);
    if (sec == s.end() || name.empty()) throw ConfigError(name, "unknown section [" + name + "]");
    for (const auto& [key, child] : node)
      if (!sec->second.count(key)) throw ConfigError(name + "." + key, "unknown key");
  }
}

std::string join_phases(const std::vector<PhaseKind>& v) {
  std::string s;
  for (PhaseKind k : v) {
    if (!s.empty()) s += ',';
    s += to_string(k);
  }
  return s;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t x : v) {
    if (!s.empty()) s += ',';
    s += std::to_string(x);
  }
  return s;
}

}  // namespace

std::vector<PhaseConfig> ExperimentConfig::phase_configs() const {
  std::vector<PhaseConfig> out;
  for (PhaseKind k : phases) {
    switch (k) {
      case PhaseKind::NL: out.push_back(with_optimizer(nl, *this)); break;
      case PhaseKind::SelNL: out.push_back(with_optimizer(selnl, *this)); break;
      case PhaseKind::SelPL: out.push_back(with_optimizer(selpl, *this)); break;
      case PhaseKind::PL: {
        PhaseConfig p = with_optimizer(selpl, *this);
        p.kind = PhaseKind::PL;
        out.push_back(p);
        break;
      }
      default: throw ConfigError("selnlpl.phases", "phase " + to_string(k) + " cannot appear in the SelNLPL sequence");
    }
    out.back().kind = k;
  }
  return out;
}

PseudoLabelConfig ExperimentConfig::pseudo_configs() const {
  PseudoLabelConfig p = pseudo;
  p.clean_train = with_optimizer(p.clean_train, *this);
  p.final_train = with_optimizer(p.final_train, *this);
  return p;
}

PhaseConfig ExperimentConfig::baseline_config() const { return with_optimizer(baseline, *this); }

void ExperimentConfig::validate() const {
  if (dataset.kind == "blobs") {
    if (dataset.blobs.classes < 2) throw ConfigError("dataset.classes", "must be >= 2");
    if (dataset.blobs.dim < 2) throw ConfigError("dataset.dim", "must be >= 2");
    if (dataset.blobs.per_class < 2) throw ConfigError("dataset.per_class", "must be >= 2");
    if (!(dataset.blobs.separation > 0.0)) throw ConfigError("dataset.separation", "must be > 0");
    if (!(dataset.test_fraction > 0.0 && dataset.test_fraction < 1.0))
      throw ConfigError("dataset.test_fraction", "must be in (0, 1)");
  } else if (dataset.kind == "idx") {
    if (dataset.train_images.empty()) throw ConfigError("dataset.train_images", "required for idx datasets");
    if (dataset.train_labels.empty()) throw ConfigError("dataset.train_labels", "required for idx datasets");
    if (dataset.test_images.empty() != dataset.test_labels.empty())
      throw ConfigError("dataset.test_images", "test_images and test_labels must be given together");
  } else {
    throw ConfigError("dataset.kind", "expected blobs or idx, got '" + dataset.kind + "'");
  }
  if (!(noise.ratio >= 0.0 && noise.ratio <= 1.0)) throw ConfigError("noise.ratio", "must be in [0, 1]");
  if (noise.kind == NoiseKind::asymm && !noise.asymm_map) throw ConfigError("noise.map", "asymm noise requires a map");
  if (noise.kind != NoiseKind::asymm && noise.asymm_map) throw ConfigError("noise.map", "only valid with asymm noise");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer.momentum", "must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("optimizer.weight_decay", "must be >= 0");
  if (batch_size == 0) throw ConfigError("optimizer.batch_size", "must be >= 1");
  if (phases.empty()) throw ConfigError("selnlpl.phases", "at least one phase is required");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("selnlpl.gamma", "must be in (0, 1)");
  for (std::size_t h : hidden)
    if (h == 0) throw ConfigError("network.hidden", "layer widths must be >= 1");
  auto check_phase = [](const PhaseConfig& p, const std::string& sec) {
    if (p.epochs == 0) throw ConfigError(sec + ".epochs", "must be >= 1");
    if (!(p.learning_rate >= 0.0)) throw ConfigError(sec + ".lr", "must be >= 0");
  };
  check_phase(nl, "nl");
  check_phase(selnl, "selnl");
  check_phase(selpl, "selpl");
  check_phase(pseudo.clean_train, "pseudo");
  check_phase(baseline, "baseline");
  if (!(pseudo.clean_train.decay_factor > 0.0)) throw ConfigError("pseudo.decay_factor", "must be > 0");
  if (histogram_bins < 2) throw ConfigError("report.histogram_bins", "must be >= 2");
  for (const PhaseConfig& p : phase_configs()) p.validate();
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  check_schema(root);
  Reader r(root);
  ExperimentConfig c;

  {
    std::size_t seed = c.seed;
    r.read("", "seed", seed);
    c.seed = seed;
  }
  r.read("", "out", c.out);

  r.read("dataset", "kind", c.dataset.kind);
  r.read("dataset", "classes", c.dataset.blobs.classes);
  c.dataset.classes = r.get("dataset", "classes") ? c.dataset.blobs.classes : 0;
  r.read("dataset", "per_class", c.dataset.blobs.per_class);
  r.read("dataset", "dim", c.dataset.blobs.dim);
  r.read("dataset", "separation", c.dataset.blobs.separation);
  r.read("dataset", "test_fraction", c.dataset.test_fraction);
  r.read("dataset", "train_images", c.dataset.train_images);
  r.read("dataset", "train_labels", c.dataset.train_labels);
  r.read("dataset", "test_images", c.dataset.test_images);
  r.read("dataset", "test_labels", c.dataset.test_labels);
  r.read("dataset", "limit", c.dataset.limit);

  if (auto v = r.get("noise", "kind")) c.noise.kind = parse_noise_kind(*v);
  r.read("noise", "ratio", c.noise.ratio);
  if (auto v = r.get("noise", "map"); v && !v->empty()) c.noise.asymm_map = parse_asymm_map(*v);
  r.read("noise", "exact_count", c.noise.exact_count);

  r.read_list("network", "hidden", c.hidden);

  r.read("optimizer", "momentum", c.momentum);
  r.read("optimizer", "weight_decay", c.weight_decay);
  r.read("optimizer", "batch_size", c.batch_size);

  if (auto v = r.get("selnlpl", "phases")) {
    c.phases.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) c.phases.push_back(parse_phase_kind(item));
    }
  }
  r.read("selnlpl", "gamma", c.gamma);
  r.read("selnlpl", "complementary_labels", c.complementary_labels);

  for (auto [sec, phase] : {std::pair<const char*, PhaseConfig*>{"nl", &c.nl}, {"selnl", &c.selnl}, {"selpl", &c.selpl}}) {
    r.read(sec, "epochs", phase->epochs);
    r.read(sec, "lr", phase->learning_rate);
  }

  r.read("pseudo", "enabled", c.pseudo_enabled);
  r.read("pseudo", "epochs", c.pseudo.clean_train.epochs);
  r.read("pseudo", "lr", c.pseudo.clean_train.learning_rate);
  r.read_list("pseudo", "decay_at", c.pseudo.clean_train.decay_epochs);
  r.read("pseudo", "decay_factor", c.pseudo.clean_train.decay_factor);
  c.pseudo.final_train = c.pseudo.clean_train;
  c.pseudo.final_train.kind = PhaseKind::PseudoFinalTrain;

  r.read("baseline", "enabled", c.baseline_enabled);
  r.read("baseline", "epochs", c.baseline.epochs);
  r.read("baseline", "lr", c.baseline.learning_rate);

  r.read("report", "histogram_bins", c.histogram_bins);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_config(text);
}

std::string to_config_text(const ExperimentConfig& c) {
  auto d = [](double v) { return io::format_double(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  std::ostringstream o;
  o << "seed = " << c.seed << "\n";
  if (!c.out.empty()) o << "out = " << c.out << "\n";
  o << "\n[dataset]\nkind = " << c.dataset.kind << "\n";
  if (c.dataset.kind == "blobs") {
    o << "classes = " << c.dataset.blobs.classes << "\nper_class = " << c.dataset.blobs.per_class
      << "\ndim = " << c.dataset.blobs.dim << "\nseparation = " << d(c.dataset.blobs.separation)
      << "\ntest_fraction = " << d(c.dataset.test_fraction) << "\n";
  } else {
    if (c.dataset.classes) o << "classes = " << c.dataset.classes << "\n";
    o << "train_images = " << c.dataset.train_images << "\ntrain_labels = " << c.dataset.train_labels << "\n";
    if (!c.dataset.test_images.empty())
      o << "test_images = " << c.dataset.test_images << "\ntest_labels = " << c.dataset.test_labels << "\n";
    o << "limit = " << c.dataset.limit << "\n";
  }
  o << "\n[noise]\nkind = " << to_string(c.noise.kind) << "\nratio = " << d(c.noise.ratio) << "\n";
  if (c.noise.asymm_map) o << "map = " << format_asymm_map(*c.noise.asymm_map) << "\n";
  o << "exact_count = " << b(c.noise.exact_count) << "\n";
  o << "\n[network]\nhidden = " << join(c.hidden) << "\n";
  o << "\n[optimizer]\nmomentum = " << d(c.momentum) << "\nweight_decay = " << d(c.weight_decay)
    << "\nbatch_size = " << c.batch_size << "\n";
  o << "\n[selnlpl]\nphases = " << join_phases(c.phases) << "\ngamma = " << d(c.gamma)
    << "\ncomplementary_labels = " << c.complementary_labels << "\n";
  for (auto [sec, p] : {std::pair<const char*, const PhaseConfig*>{"nl", &c.nl}, {"selnl", &c.selnl}, {"selpl", &c.selpl}})
    o << "\n[" << sec << "]\nepochs = " << p->epochs << "\nlr = " << d(p->learning_rate) << "\n";
  o << "\n[pseudo]\nenabled = " << b(c.pseudo_enabled) << "\nepochs = " << c.pseudo.clean_train.epochs
    << "\nlr = " << d(c.pseudo.clean_train.learning_rate) << "\ndecay_at = " << join(c.pseudo.clean_train.decay_epochs)
    << "\ndecay_factor = " << d(c.pseudo.clean_train.decay_factor) << "\n";
  o << "\n[baseline]\nenabled = " << b(c.baseline_enabled) << "\nepochs = " << c.baseline.epochs
    << "\nlr = " << d(c.baseline.learning_rate) << "\n";
  o << "\n[report]\nhistogram_bins = " << c.histogram_bins << "\n";
  return o.str();
}

}  // namespace nlnl
