#include "nlnl/checkpoint.hpp"

#include <json.hpp>

#include "nlnl/error.hpp"
#include "nlnl/io.hpp"

namespace nlnl {

using nlohmann::json;

namespace {

json rows_of(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r)
    out.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                      flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  return out;
}

std::vector<double> flatten(const json& rows, std::size_t n_rows, std::size_t n_cols, const std::string& what) {
  if (!rows.is_array() || rows.size() != n_rows) throw ParseError(what + ": expected " + std::to_string(n_rows) + " rows");
  std::vector<double> flat;
  flat.reserve(n_rows * n_cols);
  for (const json& row : rows) {
    if (!row.is_array() || row.size() != n_cols) throw ParseError(what + ": row length != " + std::to_string(n_cols));
    for (const json& v : row) flat.push_back(v.get<double>());
  }
  return flat;
}

}  // namespace

std::string checkpoint_to_json(const Network& net, const OptimizerState* optimizer) {
  json j;
  j["format"] = "nlnl-checkpoint";
  j["version"] = 1;
  j["seed"] = net.seed();
  j["dims"] = net.dims();
  json layers = json::array();
  for (const Layer& l : net.layers()) {
    layers.push_back({{"fan_in", l.fan_in},
                      {"fan_out", l.fan_out},
                      {"activation", to_string(l.activation)},
                      {"weights", rows_of(l.weights, l.fan_in, l.fan_out)},
                      {"bias", l.bias}});
  }
  j["layers"] = std::move(layers);
  if (optimizer) {
    json vw = json::array();
    for (std::size_t i = 0; i < net.layers().size(); ++i)
      vw.push_back(rows_of(optimizer->velocity_weights[i], net.layers()[i].fan_in, net.layers()[i].fan_out));
    j["optimizer"] = {{"learning_rate", optimizer->learning_rate},
                      {"momentum", optimizer->momentum},
                      {"weight_decay", optimizer->weight_decay},
                      {"velocity_weights", std::move(vw)},
                      {"velocity_bias", optimizer->velocity_bias}};
  }
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "nlnl-checkpoint") throw ParseError("checkpoint: missing format tag");
    if (j.value("version", 0) != 1) throw ParseError("checkpoint: unsupported version");
    std::vector<Layer> layers;
    for (const json& jl : j.at("layers")) {
      Layer l;
      l.fan_in = jl.at("fan_in").get<std::size_t>();
      l.fan_out = jl.at("fan_out").get<std::size_t>();
      l.activation = parse_activation(jl.at("activation").get<std::string>());
      l.weights = flatten(jl.at("weights"), l.fan_in, l.fan_out, "checkpoint weights");
      l.bias = jl.at("bias").get<std::vector<double>>();
      layers.push_back(std::move(l));
    }
    Network net(std::move(layers), j.at("seed").get<std::uint64_t>());
    if (j.contains("dims") && j["dims"].get<std::vector<std::size_t>>() != net.dims())
      throw ParseError("checkpoint: header dims disagree with layer shapes");
    Checkpoint cp{std::move(net), std::nullopt};
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      OptimizerState s = OptimizerState::for_network(cp.network, o.at("learning_rate").get<double>(),
                                                     o.at("momentum").get<double>(),
                                                     o.at("weight_decay").get<double>());
      const auto& ls = cp.network.layers();
      for (std::size_t i = 0; i < ls.size(); ++i) {
        s.velocity_weights[i] = flatten(o.at("velocity_weights").at(i), ls[i].fan_in, ls[i].fan_out, "velocity");
        s.velocity_bias[i] = o.at("velocity_bias").at(i).get<std::vector<double>>();
        if (s.velocity_bias[i].size() != ls[i].fan_out) throw ParseError("checkpoint: velocity bias shape");
      }
      cp.optimizer = std::move(s);
    }
    return cp;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Network& net, const OptimizerState* optimizer) {
  io::write_atomic(path, checkpoint_to_json(net, optimizer));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(io::read_file(path)); }

}  // namespace nlnl
