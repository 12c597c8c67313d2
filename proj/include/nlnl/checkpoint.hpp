#pragma once

// Parameter checkpoints as JSON:
//
//   {
//     "format": "nlnl-checkpoint", "version": 1,
//     "seed": <uint64>, "dims": [in, h1, ..., c],
//     "layers": [ { "fan_in": n, "fan_out": m, "activation": "relu"|"identity",
//                   "weights": [[w_00 .. w_0(m-1)], ...],   // fan_in rows
//                   "bias": [b_0 .. b_(m-1)] }, ... ],
//     "optimizer": { "learning_rate", "momentum", "weight_decay",
//                    "velocity_weights": [[...]], "velocity_bias": [[...]] }   // optional
//   }
//
// Doubles are written in shortest round-trip form, so load(save(x)) == x.

#include <filesystem>
#include <optional>
#include <string>

#include "nlnl/engine.hpp"

namespace nlnl {

struct Checkpoint {
  Network network;
  std::optional<OptimizerState> optimizer;
};

std::string checkpoint_to_json(const Network& net, const OptimizerState* optimizer = nullptr);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const OptimizerState* optimizer = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace nlnl
