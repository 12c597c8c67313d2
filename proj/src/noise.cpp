#include "nlnl/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nlnl/error.hpp"
#include "nlnl/io.hpp"

namespace nlnl {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::symm_inc:
      return "symm_inc";
    case NoiseKind::symm_exc:
      return "symm_exc";
    case NoiseKind::asymm:
      return "asymm";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "symm_inc") return NoiseKind::symm_inc;
  if (s == "symm_exc") return NoiseKind::symm_exc;
  if (s == "asymm") return NoiseKind::asymm;
  throw ConfigError("noise.kind", "unknown noise kind '" + std::string(s) + "' (expected symm_inc, symm_exc, asymm)");
}

void NoiseSpec::validate(std::size_t classes) const {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("noise.ratio", "must be in [0, 1]");
  if (kind == NoiseKind::asymm) {
    if (!asymm_map || asymm_map->empty()) throw ConfigError("noise.map", "asymm noise requires a class map");
    for (auto [src, dst] : *asymm_map) {
      if (src == dst) throw ConfigError("noise.map", "self-loop " + std::to_string(src) + ":" + std::to_string(dst));
      if (src >= classes || dst >= classes)
        throw ConfigError("noise.map", "class " + std::to_string(std::max(src, dst)) + " out of range for " +
                                           std::to_string(classes) + " classes");
    }
  } else if (asymm_map) {
    throw ConfigError("noise.map", "a class map is only valid with asymm noise");
  }
}

double NoisyDataset::noise_fraction() const {
  if (is_noisy.empty()) return 0.0;
  return static_cast<double>(std::count(is_noisy.begin(), is_noisy.end(), 1)) / static_cast<double>(is_noisy.size());
}

void NoisyDataset::validate() const {
  data.validate();
  if (clean_labels.size() != data.size() || is_noisy.size() != data.size())
    throw ShapeError("noisy dataset bookkeeping does not match sample count");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (clean_labels[i] >= data.classes) throw InvalidProblem("clean label out of range");
    if ((is_noisy[i] != 0) != (data.labels[i] != clean_labels[i]))
      throw InvalidProblem("is_noisy flag inconsistent with labels at sample " + std::to_string(i));
  }
}

NoisyDataset as_clean(const LabeledDataset& clean) {
  NoisyDataset out{clean, clean.labels, std::vector<std::uint8_t>(clean.size(), 0)};
  return out;
}

NoisyDataset inject_noise(const LabeledDataset& clean, const NoiseSpec& spec) {
  clean.validate();
  spec.validate(clean.classes);
  const std::size_t n = clean.size(), c = clean.classes;
  Rng rng(spec.seed);

  auto eligible = [&](std::size_t i) {
    return spec.kind != NoiseKind::asymm || spec.asymm_map->count(clean.labels[i]) != 0;
  };

  std::vector<std::uint8_t> corrupt(n, 0);
  if (spec.exact_count) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i)
      if (eligible(i)) pool.push_back(i);
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(spec.ratio * static_cast<double>(pool.size())));
    for (std::size_t j = 0; j < take; ++j) corrupt[pool[j]] = 1;
  } else {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = coin(rng);
      corrupt[i] = eligible(i) && u < spec.ratio;
    }
  }

  NoisyDataset out{clean, clean.labels, std::vector<std::uint8_t>(n, 0)};
  std::uniform_int_distribution<std::size_t> any_class(0, c - 1);
  std::uniform_int_distribution<std::size_t> other_class(0, c - 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (!corrupt[i]) continue;
    const std::size_t y = clean.labels[i];
    std::size_t next = y;
    switch (spec.kind) {
      case NoiseKind::symm_inc:
        next = any_class(rng);
        break;
      case NoiseKind::symm_exc:
        next = other_class(rng);
        if (next >= y) ++next;
        break;
      case NoiseKind::asymm:
        next = spec.asymm_map->at(y);
        break;
    }
    out.data.labels[i] = next;
    out.is_noisy[i] = next != y;
  }
  return out;
}

AsymmMap builtin_asymm_map(std::string_view name) {
  if (name == "mnist") return {{2, 7}, {3, 8}, {7, 1}, {5, 6}, {6, 5}};
  if (name == "cifar10") return {{9, 1}, {2, 0}, {4, 7}, {3, 5}, {5, 3}};
  throw ConfigError("noise.map", "unknown builtin map '" + std::string(name) + "' (supported: mnist, cifar10)");
}

AsymmMap parse_asymm_map(std::string_view text) {
  if (text == "mnist" || text == "cifar10") return builtin_asymm_map(text);
  AsymmMap map;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string_view pair = text.substr(start, comma == text.npos ? text.npos : comma - start);
    while (!pair.empty() && pair.front() == ' ') pair.remove_prefix(1);
    while (!pair.empty() && pair.back() == ' ') pair.remove_suffix(1);
    if (!pair.empty()) {
      const std::size_t colon = pair.find(':');
      if (colon == pair.npos)
        throw ConfigError("noise.map", "expected 'src:dst' pairs or a builtin name, got '" + std::string(pair) + "'");
      try {
        const double src = io::parse_double(pair.substr(0, colon));
        const double dst = io::parse_double(pair.substr(colon + 1));
        if (src < 0 || dst < 0 || src != std::floor(src) || dst != std::floor(dst)) throw ParseError("");
        if (!map.emplace(static_cast<std::size_t>(src), static_cast<std::size_t>(dst)).second)
          throw ConfigError("noise.map", "source class listed twice: " + std::string(pair));
      } catch (const ParseError&) {
        throw ConfigError("noise.map", "bad class pair '" + std::string(pair) + "'");
      }
    }
    if (comma == text.npos) break;
    start = comma + 1;
  }
  if (map.empty()) throw ConfigError("noise.map", "empty class map");
  return map;
}

std::string format_asymm_map(const AsymmMap& map) {
  std::string out;
  for (auto [src, dst] : map) {
    if (!out.empty()) out += ',';
    out += std::to_string(src) + ":" + std::to_string(dst);
  }
  return out;
}

std::string noise_audit_csv(const NoisyDataset& data) {
  io::CsvWriter w({"id", "y_observed", "y_clean", "is_noisy"});
  for (std::size_t i = 0; i < data.size(); ++i)
    w.field(i).field(data.data.labels[i]).field(data.clean_labels[i]).field(static_cast<int>(data.is_noisy[i])).end_row();
  return w.str();
}

}  // namespace nlnl
