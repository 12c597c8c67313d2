#include "nlnl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nlnl/error.hpp"
#include "nlnl/kernels.hpp"
#include "nlnl/rng.hpp"

namespace nlnl {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  softmax_into(logits, out);
  return out;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  if (logits.size() != out.size()) throw ShapeError("softmax: output size mismatch");
  if (logits.empty()) return;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - m);
    sum += out[k];
  }
  const double inv = 1.0 / sum;
  for (double& v : out) v *= inv;
}

std::size_t argmax(std::span<const double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw ParseError("unknown activation '" + s + "' (expected relu or identity)");
}

Network Network::init(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidProblem("network needs at least input and output dimensions");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.fan_in = dims[l];
    layer.fan_out = dims[l + 1];
    layer.activation = (l + 2 == dims.size()) ? Activation::identity : Activation::relu;
    if (layer.fan_in == 0 || layer.fan_out == 0) throw InvalidProblem("layer dimensions must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weights.resize(layer.fan_in * layer.fan_out);
    for (double& w : layer.weights) w = dist(rng);
    layer.bias.assign(layer.fan_out, 0.0);
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers), seed);
}

Network::Network(std::vector<Layer> layers, std::uint64_t seed) : layers_(std::move(layers)), seed_(seed) {
  if (layers_.empty()) throw InvalidProblem("network has no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weights.size() != layer.fan_in * layer.fan_out || layer.bias.size() != layer.fan_out)
      throw ShapeError("layer " + std::to_string(l) + ": parameter sizes do not match fan_in/fan_out");
    if (l > 0 && layers_[l - 1].fan_out != layer.fan_in)
      throw ShapeError("layer " + std::to_string(l) + ": fan_in does not chain with previous fan_out");
    if (!all_finite(layer.weights) || !all_finite(layer.bias))
      throw NumericError("layer " + std::to_string(l) + ": non-finite parameter");
  }
  if (num_classes() < 2) throw InvalidProblem("output dimension (class count) must be >= 2");
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> Network::dims() const {
  std::vector<std::size_t> d{input_dim()};
  for (const Layer& l : layers_) d.push_back(l.fan_out);
  return d;
}

void forward(const Network& net, std::span<const double> x, ForwardTrace& trace) {
  if (x.size() != net.input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.size()) + " features, network expects " +
                     std::to_string(net.input_dim()));
  const auto& layers = net.layers();
  trace.activations.resize(layers.size() + 1);
  trace.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const std::vector<double>& in = trace.activations[l];
    std::vector<double>& out = trace.activations[l + 1];
    out.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t i = 0; i < layer.fan_in; ++i) kernels::axpy(in[i], layer.row(i), out);
    if (layer.activation == Activation::relu) kernels::relu(out);
  }
  trace.probs.resize(net.num_classes());
  softmax_into(trace.logits(), trace.probs);
}

Prediction forward(const Network& net, std::span<const double> x) {
  ForwardTrace trace;
  forward(net, x, trace);
  return Prediction{std::move(trace.activations.back()), std::move(trace.probs)};
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const Layer& l : net.layers()) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void Gradients::zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::scale(double alpha) {
  for (auto& w : weights) kernels::scale(alpha, w);
  for (auto& b : bias) kernels::scale(alpha, b);
}

void backward_accumulate(const Network& net, const ForwardTrace& trace, std::span<const double> logit_grad,
                         Gradients& grads) {
  const auto& layers = net.layers();
  if (logit_grad.size() != net.num_classes()) throw ShapeError("backward: logit gradient length != class count");
  if (trace.activations.size() != layers.size() + 1) throw ShapeError("backward: trace does not match network");
  if (grads.weights.size() != layers.size() || grads.bias.size() != layers.size())
    throw ShapeError("backward: gradient buffers do not match network");

  std::vector<double> delta(logit_grad.begin(), logit_grad.end());
  std::vector<double> next;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Layer& layer = layers[l];
    const std::vector<double>& in = trace.activations[l];
    std::vector<double>& gw = grads.weights[l];
    if (gw.size() != layer.weights.size()) throw ShapeError("backward: gradient buffer shape mismatch");
    for (std::size_t i = 0; i < layer.fan_in; ++i)
      kernels::axpy(in[i], delta, std::span<double>(gw.data() + i * layer.fan_out, layer.fan_out));
    kernels::axpy(1.0, delta, grads.bias[l]);
    if (l == 0) break;
    next.resize(layer.fan_in);
    for (std::size_t i = 0; i < layer.fan_in; ++i) next[i] = kernels::dot(layer.row(i), delta);
    if (layers[l - 1].activation == Activation::relu) kernels::relu_mask(in, next);
    delta.swap(next);
  }
}

Gradients backward(const Network& net, std::span<const double> x, std::span<const double> logit_grad) {
  ForwardTrace trace;
  forward(net, x, trace);
  Gradients g = Gradients::zeros_like(net);
  backward_accumulate(net, trace, logit_grad, g);
  return g;
}

OptimizerState OptimizerState::for_network(const Network& net, double learning_rate, double momentum,
                                           double weight_decay) {
  OptimizerState s;
  s.learning_rate = learning_rate;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  for (const Layer& l : net.layers()) {
    s.velocity_weights.emplace_back(l.weights.size(), 0.0);
    s.velocity_bias.emplace_back(l.bias.size(), 0.0);
  }
  s.validate();
  return s;
}

void OptimizerState::validate() const {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer.momentum", "must be in [0, 1)");
  // lr = 0 is accepted: it freezes the parameters, which the pipeline tests rely on.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("optimizer.lr", "must be finite and non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("optimizer.weight_decay", "must be >= 0");
}

void sgd_step(Network& net, const Gradients& grads, OptimizerState& state) {
  auto& layers = net.layers();
  if (grads.weights.size() != layers.size() || state.velocity_weights.size() != layers.size())
    throw ShapeError("sgd_step: gradient/optimizer buffers do not match network");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weights[l].size() != layers[l].weights.size() || grads.bias[l].size() != layers[l].bias.size() ||
        state.velocity_weights[l].size() != layers[l].weights.size() ||
        state.velocity_bias[l].size() != layers[l].bias.size())
      throw ShapeError("sgd_step: layer " + std::to_string(l) + " buffer shape mismatch");
    if (!all_finite(grads.weights[l]) || !all_finite(grads.bias[l]))
      throw NumericError("sgd_step: non-finite gradient in layer " + std::to_string(l));
  }
  const auto& k = kernels::active();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Layer& layer = layers[l];
    k.sgd_momentum(layer.weights.data(), state.velocity_weights[l].data(), grads.weights[l].data(),
                   layer.weights.size(), state.momentum, state.weight_decay, state.learning_rate);
    k.sgd_momentum(layer.bias.data(), state.velocity_bias[l].data(), grads.bias[l].data(), layer.bias.size(),
                   state.momentum, 0.0, state.learning_rate);
    if (!all_finite(layer.weights) || !all_finite(layer.bias))
      throw NumericError("sgd_step: parameters of layer " + std::to_string(l) + " became non-finite");
  }
}

}  // namespace nlnl
