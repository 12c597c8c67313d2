#pragma once

// Minimal fully connected classifier with softmax output, backprop, and SGD
// with momentum and coupled weight decay.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlnl/numeric.hpp"

namespace nlnl {

enum class Activation { relu, identity };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

// weights are row-major [fan_in x fan_out]: row i holds the outgoing weights
// of input unit i.
struct Layer {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  Activation activation = Activation::identity;
  std::vector<double> weights;
  std::vector<double> bias;

  std::span<const double> row(std::size_t i) const { return {weights.data() + i * fan_out, fan_out}; }
  std::span<double> row(std::size_t i) { return {weights.data() + i * fan_out, fan_out}; }

  bool operator==(const Layer&) const = default;
};

class Network {
 public:
  // dims = {input, hidden..., classes}. Hidden layers use ReLU, the output
  // layer is linear. Weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), biases 0.
  static Network init(const std::vector<std::size_t>& dims, std::uint64_t seed);

  Network(std::vector<Layer> layers, std::uint64_t seed);

  std::size_t input_dim() const { return layers_.front().fan_in; }
  std::size_t num_classes() const { return layers_.back().fan_out; }
  std::uint64_t seed() const { return seed_; }
  std::size_t parameter_count() const;
  std::vector<std::size_t> dims() const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  bool operator==(const Network&) const = default;

 private:
  std::vector<Layer> layers_;
  std::uint64_t seed_ = 0;
};

struct Prediction {
  std::vector<double> logits;
  std::vector<double> probs;
};

// Per-layer activations kept for backprop. activations[0] is the input,
// activations[l + 1] is the (post-activation) output of layer l; the last
// entry holds the logits.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;
  std::vector<double> probs;

  std::span<const double> logits() const { return activations.back(); }
};

Prediction forward(const Network& net, std::span<const double> x);
void forward(const Network& net, std::span<const double> x, ForwardTrace& trace);

// Same shapes as the network parameters.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static Gradients zeros_like(const Network& net);
  void zero();
  void scale(double alpha);
};

// Gradient of a scalar loss whose derivative w.r.t. the logits is
// `logit_grad`, accumulated into `grads`. `trace` must come from forward()
// with the current parameters.
void backward_accumulate(const Network& net, const ForwardTrace& trace, std::span<const double> logit_grad,
                         Gradients& grads);

Gradients backward(const Network& net, std::span<const double> x, std::span<const double> logit_grad);

struct OptimizerState {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<std::vector<double>> velocity_weights;
  std::vector<std::vector<double>> velocity_bias;

  static OptimizerState for_network(const Network& net, double learning_rate, double momentum,
                                    double weight_decay);
  void validate() const;
};

// v <- momentum * v + g + wd * w;  w <- w - lr * v. Weight decay applies to
// weights only, not biases. Throws NumericError on non-finite gradients.
void sgd_step(Network& net, const Gradients& grads, OptimizerState& state);

}  // namespace nlnl
