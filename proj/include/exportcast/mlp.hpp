#pragma once

#include "exportcast/error.hpp"
#include "exportcast/metrics.hpp"
#include "exportcast/preprocess.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

/// Hidden-layer activation. The output neuron is always linear.
/// `identity` exists for linear-model checks.
enum class Activation { relu, sigmoid, identity };

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "?";
}

struct NetworkConfig {
  std::vector<std::size_t> layer_sizes{4, 16, 1};  // input, hidden..., 1
  Activation hidden_activation = Activation::relu;
  int epochs = 200;
  double learning_rate = 0.03;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

inline void validate(const NetworkConfig& cfg) {
  const auto& s = cfg.layer_sizes;
  if (s.size() < 3) throw std::invalid_argument("layer_sizes needs input, >= 1 hidden layer and output");
  for (auto n : s) {
    if (n == 0) throw std::invalid_argument("layer_sizes entries must be >= 1");
  }
  if (s.back() != 1) throw std::invalid_argument("final layer size must be exactly 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

/// Fully connected layer. weights[j * outputs + n] connects incoming neuron j
/// to neuron n.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out)
      : inputs(in), outputs(out), weights(in * out, 0.0), biases(out, 0.0) {}

  [[nodiscard]] double& w(std::size_t j, std::size_t n) { return weights[j * outputs + n]; }
  [[nodiscard]] double w(std::size_t j, std::size_t n) const { return weights[j * outputs + n]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

using LayerStack = std::vector<DenseLayer>;

inline LayerStack zeros_like(const LayerStack& layers) {
  LayerStack out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.emplace_back(l.inputs, l.outputs);
  return out;
}

struct Network {
  Activation hidden_activation = Activation::relu;
  LayerStack layers;

  [[nodiscard]] std::size_t input_size() const { return layers.front().inputs; }

  [[nodiscard]] std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> sizes{layers.front().inputs};
    for (const auto& l : layers) sizes.push_back(l.outputs);
    return sizes;
  }

  [[nodiscard]] bool all_finite() const {
    for (const auto& l : layers) {
      for (double v : l.weights) if (!std::isfinite(v)) return false;
      for (double v : l.biases) if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Network&, const Network&) = default;
};

/// Adam first/second moments, shaped like the network, and the step count.
struct AdamState {
  LayerStack first_moment;
  LayerStack second_moment;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Gradient of the loss with respect to every weight and bias.
struct Gradients {
  LayerStack layers;
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(std::mt19937_64& rng) {
  double u1 = 0.0;
  do {
    u1 = unit_uniform(rng);
  } while (u1 == 0.0);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::identity: return x;
  }
  return x;
}

// Derivative expressed through the pre-activation `x` and output `y`.
// ReLU subgradient at 0 is 0.
inline double activate_derivative(Activation a, double x, double y) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

}  // namespace detail

struct InitResult {
  Network network;
  AdamState state;
};

/// Gaussian weights from a stream seeded by cfg.seed: stddev sqrt(2 / fan_in)
/// for hidden layers, sqrt(1 / fan_in) for the linear output layer. Zero
/// biases; zeroed Adam state.
inline InitResult init_network(const NetworkConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  Network net;
  net.hidden_activation = cfg.hidden_activation;
  const auto& sizes = cfg.layer_sizes;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer layer(sizes[k], sizes[k + 1]);
    const double gain = k + 2 == sizes.size() ? 1.0 : 2.0;
    const double scale = std::sqrt(gain / static_cast<double>(sizes[k]));
    for (double& w : layer.weights) w = scale * detail::standard_normal(rng);
    net.layers.push_back(std::move(layer));
  }
  AdamState state{zeros_like(net.layers), zeros_like(net.layers), 0};
  return {std::move(net), std::move(state)};
}

/// Pre-activation (i) and output (o) values of every layer. outputs[0] is the
/// input vector; outputs[k + 1] and inputs[k] belong to layer k.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> outputs;
};

struct ForwardResult {
  double output = 0.0;
  ForwardCache cache;
};

namespace detail {

inline void check_input(const Network& net, std::span<const double> input) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (input.size() != net.input_size()) {
    throw std::invalid_argument("input length " + std::to_string(input.size()) +
                                " does not match network input size " +
                                std::to_string(net.input_size()));
  }
}

// i_n = sum_j w_jn o_j + b_n
inline void affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.assign(layer.biases.begin(), layer.biases.end());
  for (std::size_t j = 0; j < layer.inputs; ++j) {
    const double x = in[j];
    const double* row = &layer.weights[j * layer.outputs];
    for (std::size_t n = 0; n < layer.outputs; ++n) out[n] += row[n] * x;
  }
}

}  // namespace detail

inline ForwardResult forward(const Network& net, std::span<const double> input) {
  detail::check_input(net, input);
  ForwardResult r;
  auto& c = r.cache;
  c.outputs.emplace_back(input.begin(), input.end());
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    std::vector<double> i;
    detail::affine(net.layers[k], c.outputs.back(), i);
    std::vector<double> o = i;
    if (k != last) {
      for (double& v : o) v = detail::activate(net.hidden_activation, v);
    }
    c.inputs.push_back(std::move(i));
    c.outputs.push_back(std::move(o));
  }
  r.output = c.outputs.back().front();
  return r;
}

inline double predict(const Network& net, std::span<const double> input) {
  detail::check_input(net, input);
  std::vector<double> current(input.begin(), input.end());
  std::vector<double> next;
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    detail::affine(net.layers[k], current, next);
    if (k != last) {
      for (double& v : next) v = detail::activate(net.hidden_activation, v);
    }
    current.swap(next);
  }
  return current.front();
}

/// Exact gradient of 0.5 * (o - target)^2 for the forward pass in `cache`.
inline Gradients backward(const Network& net, const ForwardCache& cache, double target) {
  Gradients g{zeros_like(net.layers)};
  const std::size_t layers = net.layers.size();

  // delta[n] = dLoss/di_n for the current layer.
  std::vector<double> delta{cache.outputs.back().front() - target};
  for (std::size_t k = layers; k-- > 0;) {
    const auto& layer = net.layers[k];
    auto& grad = g.layers[k];
    const auto& in = cache.outputs[k];
    for (std::size_t j = 0; j < layer.inputs; ++j) {
      for (std::size_t n = 0; n < layer.outputs; ++n) grad.w(j, n) = in[j] * delta[n];
    }
    grad.biases = delta;
    if (k == 0) break;

    std::vector<double> prev(layer.inputs, 0.0);
    for (std::size_t j = 0; j < layer.inputs; ++j) {
      double s = 0.0;
      for (std::size_t n = 0; n < layer.outputs; ++n) s += layer.w(j, n) * delta[n];
      prev[j] = s * detail::activate_derivative(net.hidden_activation, cache.inputs[k - 1][j],
                                                cache.outputs[k][j]);
    }
    delta.swap(prev);
  }
  return g;
}

/// One bias-corrected Adam update of every parameter.
inline void adam_step(Network& net, AdamState& state, const Gradients& grads, const NetworkConfig& cfg) {
  if (grads.layers.size() != net.layers.size() || state.first_moment.size() != net.layers.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);

  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
      throw std::invalid_argument("adam_step: shape mismatch");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  };

  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto& layer = net.layers[k];
    update(layer.weights, grads.layers[k].weights, state.first_moment[k].weights,
           state.second_moment[k].weights);
    update(layer.biases, grads.layers[k].biases, state.first_moment[k].biases,
           state.second_moment[k].biases);
  }
}

struct TrainReport {
  std::vector<double> mse_history;  // training MSE at the start of each epoch
  double train_mse = 0.0;
  double train_mae = 0.0;
  double test_mse = 0.0;
  double test_mae = 0.0;
  NetworkConfig config;
  std::uint64_t seed = 0;
};

inline std::vector<double> predict_all(const Network& net, std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(net, s.lags));
  return out;
}

inline std::vector<double> targets_of(std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.target);
  return out;
}

/// Full-batch training: each epoch averages the gradient of
/// 0.5 * (prediction - target)^2 over every training sample and applies a
/// single Adam step. The test set is only scored after the last epoch and may
/// be empty.
inline TrainReport train(Network& net, AdamState& state, std::span<const Sample> train_set,
                         std::span<const Sample> test_set, const NetworkConfig& cfg) {
  validate(cfg);
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");

  TrainReport report;
  report.config = cfg;
  report.seed = cfg.seed;
  report.mse_history.reserve(static_cast<std::size_t>(cfg.epochs));

  const double scale = 1.0 / static_cast<double>(train_set.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Gradients total{zeros_like(net.layers)};
    double sq = 0.0;
    for (const auto& sample : train_set) {
      const auto fwd = forward(net, sample.lags);
      const double e = fwd.output - sample.target;
      sq += e * e;
      const auto g = backward(net, fwd.cache, sample.target);
      for (std::size_t k = 0; k < total.layers.size(); ++k) {
        auto& acc = total.layers[k];
        for (std::size_t i = 0; i < acc.weights.size(); ++i) acc.weights[i] += g.layers[k].weights[i];
        for (std::size_t i = 0; i < acc.biases.size(); ++i) acc.biases[i] += g.layers[k].biases[i];
      }
    }
    const double epoch_mse = sq * scale;
    if (!std::isfinite(epoch_mse)) {
      throw Error("training diverged at epoch " + std::to_string(epoch));
    }
    report.mse_history.push_back(epoch_mse);

    for (auto& layer : total.layers) {
      for (double& v : layer.weights) v *= scale;
      for (double& v : layer.biases) v *= scale;
    }
    adam_step(net, state, total, cfg);
  }
  if (!net.all_finite()) throw Error("training diverged at epoch " + std::to_string(cfg.epochs));

  const auto train_pred = predict_all(net, train_set);
  const auto train_true = targets_of(train_set);
  report.train_mse = mse(train_pred, train_true);
  report.train_mae = mae(train_pred, train_true);
  if (!test_set.empty()) {
    const auto test_pred = predict_all(net, test_set);
    const auto test_true = targets_of(test_set);
    report.test_mse = mse(test_pred, test_true);
    report.test_mae = mae(test_pred, test_true);
  }
  if (!std::isfinite(report.train_mse) || !std::isfinite(report.test_mse)) {
    throw Error("training diverged at epoch " + std::to_string(cfg.epochs));
  }
  return report;
}

inline TrainReport train(Network& net, AdamState& state, const Dataset& d, const NetworkConfig& cfg) {
  if (d.split_index == 0 || d.split_index >= d.samples.size()) {
    throw std::invalid_argument("train: dataset split must leave non-empty train and test sets");
  }
  return train(net, state, d.train(), d.test(), cfg);
}

}  // namespace exportcast
