#include "support.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace exportcast;
using exportcast::testing::finite_difference_gradients;

namespace {

Network make_net(std::vector<std::size_t> sizes, Activation a, double weight = 0.0) {
  Network net;
  net.hidden_activation = a;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer l(sizes[k], sizes[k + 1]);
    std::fill(l.weights.begin(), l.weights.end(), weight);
    net.layers.push_back(l);
  }
  return net;
}

NetworkConfig config(std::vector<std::size_t> sizes, Activation a = Activation::relu) {
  NetworkConfig cfg;
  cfg.layer_sizes = std::move(sizes);
  cfg.hidden_activation = a;
  return cfg;
}

// Gradient relative error with the denominator floored at 1e-4; central
// differences at h = 1e-6 carry ~1e-10 absolute round-off.
double grad_rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

}  // namespace

TEST(InitNetwork, DeterministicPerSeed) {
  const auto a = init_network(config({4, 16, 1}));
  const auto b = init_network(config({4, 16, 1}));
  ASSERT_EQ(a.network.layers.size(), b.network.layers.size());
  for (std::size_t k = 0; k < a.network.layers.size(); ++k) {
    const auto& wa = a.network.layers[k].weights;
    const auto& wb = b.network.layers[k].weights;
    EXPECT_EQ(std::memcmp(wa.data(), wb.data(), wa.size() * sizeof(double)), 0);
  }
  auto other = config({4, 16, 1});
  other.seed = 43;
  EXPECT_NE(init_network(other).network, a.network);
}

TEST(InitNetwork, ShapesZeroBiasesFreshState) {
  const auto [net, state] = init_network(config({4, 16, 1}));
  ASSERT_EQ(net.layers.size(), 2u);
  EXPECT_EQ(net.layers[0].inputs, 4u);
  EXPECT_EQ(net.layers[0].outputs, 16u);
  EXPECT_EQ(net.layers[1].inputs, 16u);
  EXPECT_EQ(net.layers[1].outputs, 1u);
  EXPECT_EQ(net.layers[0].weights.size(), 64u);
  for (const auto& l : net.layers)
    for (double b : l.biases) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(state.step, 0u);
  EXPECT_EQ(state.first_moment, zeros_like(net.layers));
  EXPECT_EQ(state.second_moment, zeros_like(net.layers));
  EXPECT_EQ(net.layer_sizes(), (std::vector<std::size_t>{4, 16, 1}));
}

TEST(InitNetwork, HiddenLayerScale) {
  // Sample stddev of 64 * 200 first-layer weights should sit near sqrt(2 / 4).
  auto cfg = config({4, 200, 1});
  const auto net = init_network(cfg).network;
  double s = 0, s2 = 0;
  for (double w : net.layers[0].weights) s += w, s2 += w * w;
  const double n = static_cast<double>(net.layers[0].weights.size());
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_NEAR(sd, std::sqrt(0.5), 0.03);
}

TEST(InitNetwork, InvalidConfigs) {
  EXPECT_THROW(init_network(config({4, 1})), std::invalid_argument);
  EXPECT_THROW(init_network(config({4, 16, 2})), std::invalid_argument);
  EXPECT_THROW(init_network(config({4, 0, 1})), std::invalid_argument);
  auto cfg = config({4, 16, 1});
  cfg.epochs = 0;
  EXPECT_THROW(init_network(cfg), std::invalid_argument);
}

TEST(Forward, ZeroNetworkOutputsZero) {
  const auto net = make_net({3, 5, 1}, Activation::relu);
  const std::vector<double> x{0.3, 0.9, 0.1};
  EXPECT_EQ(forward(net, x).output, 0.0);
  EXPECT_EQ(predict(net, x), 0.0);
}

TEST(Forward, SigmoidAtZeroIsHalf) {
  auto net = make_net({2, 1, 1}, Activation::sigmoid);
  net.layers[1].w(0, 0) = 1.0;
  const std::vector<double> x{0.7, 0.2};
  EXPECT_EQ(forward(net, x).output, 0.5);
  EXPECT_EQ(predict(net, x), 0.5);
}

TEST(Forward, HandEvaluatedReluChain) {
  // i = 1 * 2 + 0 = 2, relu(2) = 2, output = 1 * 2 + 0 = 2.
  const auto net = make_net({1, 1, 1}, Activation::relu, 1.0);
  const std::vector<double> x{2.0};
  EXPECT_EQ(forward(net, x).output, 2.0);
  EXPECT_EQ(predict(net, x), 2.0);
}

TEST(Forward, CacheHoldsEveryLayer) {
  const auto [net, _] = init_network(config({3, 4, 2, 1}, Activation::sigmoid));
  const std::vector<double> x{0.1, 0.5, 0.9};
  const auto r = forward(net, x);
  ASSERT_EQ(r.cache.outputs.size(), 4u);
  ASSERT_EQ(r.cache.inputs.size(), 3u);
  EXPECT_EQ(r.cache.outputs[0], x);
  EXPECT_EQ(r.cache.outputs[2].size(), 2u);
  for (std::size_t n = 0; n < 4; ++n)
    EXPECT_DOUBLE_EQ(r.cache.outputs[1][n], 1.0 / (1.0 + std::exp(-r.cache.inputs[0][n])));
  EXPECT_EQ(r.cache.outputs.back().front(), r.output);
  EXPECT_EQ(r.output, predict(net, x));
}

TEST(Forward, LengthMismatch) {
  const auto net = make_net({3, 2, 1}, Activation::relu);
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(forward(net, x), std::invalid_argument);
  EXPECT_THROW(predict(net, x), std::invalid_argument);
}

TEST(Forward, IdentityActivationIsAffine) {
  std::mt19937_64 rng(4);
  auto [net, _] = init_network(config({5, 7, 3, 1}, Activation::identity));
  for (auto& l : net.layers)
    for (double& b : l.biases) b = static_cast<double>(rng() % 1000) / 500.0 - 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(5), y(5), mix(5);
    const double alpha = static_cast<double>(rng() % 1000) / 250.0 - 2.0;
    for (int i = 0; i < 5; ++i) {
      x[i] = static_cast<double>(rng() % 1000) / 1000.0;
      y[i] = static_cast<double>(rng() % 1000) / 1000.0;
      mix[i] = alpha * x[i] + (1 - alpha) * y[i];
    }
    EXPECT_NEAR(predict(net, mix), alpha * predict(net, x) + (1 - alpha) * predict(net, y), 1e-12);
  }
}

TEST(Backward, ZeroResidualGivesZeroGradient) {
  const auto [net, _] = init_network(config({4, 6, 1}, Activation::sigmoid));
  const std::vector<double> x{0.2, 0.4, 0.6, 0.8};
  const auto fwd = forward(net, x);
  const auto g = backward(net, fwd.cache, fwd.output);
  for (const auto& l : g.layers) {
    for (double v : l.weights) EXPECT_EQ(v, 0.0);
    for (double v : l.biases) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backward, LinearClosedForm) {
  // [1,1,1] identity net with output weight 1: o = w x, dL/dw = (w x - t) x.
  auto net = make_net({1, 1, 1}, Activation::identity, 1.0);
  const double w = 0.75, x = 1.6, t = 0.4;
  net.layers[0].w(0, 0) = w;
  const std::vector<double> in{x};
  const auto g = backward(net, forward(net, in).cache, t);
  EXPECT_DOUBLE_EQ(g.layers[0].weights[0], (w * x - t) * x);
  EXPECT_DOUBLE_EQ(g.layers[0].biases[0], (w * x - t));
  EXPECT_DOUBLE_EQ(g.layers[1].weights[0], (w * x - t) * (w * x));
  EXPECT_DOUBLE_EQ(g.layers[1].biases[0], (w * x - t));
}

TEST(Backward, ReluSubgradientAtZeroIsZero) {
  auto net = make_net({1, 1, 1}, Activation::relu, 1.0);
  const std::vector<double> in{0.0};
  const auto g = backward(net, forward(net, in).cache, 1.0);
  EXPECT_EQ(g.layers[0].weights[0], 0.0);
  EXPECT_EQ(g.layers[0].biases[0], 0.0);
}

TEST(Backward, MatchesFiniteDifferencesOnRandomSigmoidNets) {
  std::mt19937_64 rng(2024);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * detail::unit_uniform(rng); };
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::size_t> sizes{1 + rng() % 8};
    const std::size_t hidden = 1 + rng() % 2;
    for (std::size_t h = 0; h < hidden; ++h) sizes.push_back(1 + rng() % 8);
    sizes.push_back(1);
    auto cfg = config(sizes, Activation::sigmoid);
    cfg.seed = rng();
    auto net = init_network(cfg).network;
    for (auto& l : net.layers)
      for (double& b : l.biases) b = uni(-0.5, 0.5);
    std::vector<double> x(sizes[0]);
    for (double& v : x) v = uni(0, 1);
    const double target = uni(0, 1);

    const auto g = backward(net, forward(net, x).cache, target);
    const auto fd = finite_difference_gradients(net, x, target, 1e-6);
    for (std::size_t k = 0; k < g.layers.size(); ++k) {
      for (std::size_t i = 0; i < g.layers[k].weights.size(); ++i)
        EXPECT_LE(grad_rel_err(g.layers[k].weights[i], fd.layers[k].weights[i]), 1e-5);
      for (std::size_t i = 0; i < g.layers[k].biases.size(); ++i)
        EXPECT_LE(grad_rel_err(g.layers[k].biases[i], fd.layers[k].biases[i]), 1e-5);
    }
  }
}

TEST(AdamStep, ZeroGradientLeavesParameters) {
  const auto cfg = config({3, 4, 1});
  auto [net, state] = init_network(cfg);
  const auto before = net;
  adam_step(net, state, Gradients{zeros_like(net.layers)}, cfg);
  EXPECT_EQ(net, before);
  EXPECT_EQ(state.step, 1u);
}

TEST(AdamStep, FirstStepIsLearningRateTimesSign) {
  // Fresh state: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  const auto cfg = config({3, 4, 1});
  auto [net, state] = init_network(cfg);
  const auto before = net;
  Gradients g{zeros_like(net.layers)};
  std::mt19937_64 rng(5);
  for (auto& l : g.layers) {
    for (double& v : l.weights) v = (rng() % 2 ? 1.0 : -1.0) * (0.01 + detail::unit_uniform(rng));
    for (double& v : l.biases) v = (rng() % 2 ? 1.0 : -1.0) * (0.01 + detail::unit_uniform(rng));
  }
  adam_step(net, state, g, cfg);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    for (std::size_t i = 0; i < net.layers[k].weights.size(); ++i) {
      const double moved = net.layers[k].weights[i] - before.layers[k].weights[i];
      EXPECT_NEAR(moved, -cfg.learning_rate * (g.layers[k].weights[i] > 0 ? 1 : -1), 1e-6);
    }
    for (std::size_t i = 0; i < net.layers[k].biases.size(); ++i) {
      const double moved = net.layers[k].biases[i] - before.layers[k].biases[i];
      EXPECT_NEAR(moved, -cfg.learning_rate * (g.layers[k].biases[i] > 0 ? 1 : -1), 1e-6);
    }
  }
}

TEST(AdamStep, ZeroBetasReduceToSignDescent) {
  // Each step is lr * g / (|g| + eps): sign descent up to the epsilon term.
  auto cfg = config({2, 3, 1});
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.learning_rate = 0.05;
  auto [net, state] = init_network(cfg);
  const auto start = net;
  Gradients g{zeros_like(net.layers)};
  for (auto& l : g.layers) {
    for (std::size_t i = 0; i < l.weights.size(); ++i) l.weights[i] = (i % 2 ? 0.3 : -2.0);
    for (std::size_t i = 0; i < l.biases.size(); ++i) l.biases[i] = 0.7;
  }
  adam_step(net, state, g, cfg);
  adam_step(net, state, g, cfg);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    for (std::size_t i = 0; i < net.layers[k].weights.size(); ++i) {
      const double gi = g.layers[k].weights[i];
      const double step = cfg.learning_rate * gi / (std::abs(gi) + cfg.epsilon);
      EXPECT_NEAR(net.layers[k].weights[i], start.layers[k].weights[i] - 2 * step, 1e-15);
    }
    const double step = cfg.learning_rate * 0.7 / (0.7 + cfg.epsilon);
    for (std::size_t i = 0; i < net.layers[k].biases.size(); ++i)
      EXPECT_NEAR(net.layers[k].biases[i], start.layers[k].biases[i] - 2 * step, 1e-15);
  }
}

TEST(AdamStep, MomentsStayShapedAndNonNegative) {
  const auto cfg = config({3, 5, 1});
  auto [net, state] = init_network(cfg);
  std::mt19937_64 rng(6);
  for (int s = 0; s < 10; ++s) {
    Gradients g{zeros_like(net.layers)};
    for (auto& l : g.layers)
      for (double& v : l.weights) v = detail::unit_uniform(rng) - 0.5;
    adam_step(net, state, g, cfg);
  }
  EXPECT_EQ(state.step, 10u);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    EXPECT_EQ(state.second_moment[k].weights.size(), net.layers[k].weights.size());
    for (double v : state.second_moment[k].weights) EXPECT_GE(v, 0.0);
  }
  Gradients wrong{zeros_like(net.layers)};
  wrong.layers.pop_back();
  EXPECT_THROW(adam_step(net, state, wrong, cfg), std::invalid_argument);
}

namespace {

Dataset linear_dataset() {
  std::vector<double> s;
  for (int t = 0; t < 60; ++t) s.push_back(t / 59.0);
  return chrono_split(make_windows(s, 3), 0.75);
}

}  // namespace

TEST(Train, EpochsGuard) {
  auto cfg = config({3, 4, 1});
  auto [net, state] = init_network(cfg);
  cfg.epochs = 0;
  EXPECT_THROW(train(net, state, linear_dataset(), cfg), std::invalid_argument);
}

TEST(Train, LinearTargetDescends) {
  auto cfg = config({3, 4, 1}, Activation::identity);
  cfg.epochs = 100;
  auto [net, state] = init_network(cfg);
  const auto r = train(net, state, linear_dataset(), cfg);
  ASSERT_EQ(r.mse_history.size(), 100u);
  EXPECT_LT(r.train_mse, r.mse_history.front());
  for (double m : r.mse_history) {
    EXPECT_TRUE(std::isfinite(m));
    EXPECT_GE(m, 0.0);
  }
  EXPECT_TRUE(net.all_finite());
  EXPECT_EQ(state.step, 100u);
}

TEST(Train, BitIdenticalReruns) {
  const auto cfg = config({3, 8, 1});
  auto a = init_network(cfg);
  auto b = init_network(cfg);
  const auto ra = train(a.network, a.state, linear_dataset(), cfg);
  const auto rb = train(b.network, b.state, linear_dataset(), cfg);
  EXPECT_EQ(a.network, b.network);
  EXPECT_EQ(ra.mse_history, rb.mse_history);
  EXPECT_EQ(ra.test_mse, rb.test_mse);
}

TEST(Train, DivergenceIsReportedWithEpoch) {
  auto cfg = config({3, 4, 1}, Activation::identity);
  cfg.learning_rate = 1e300;
  cfg.epochs = 20;
  auto [net, state] = init_network(cfg);
  try {
    train(net, state, linear_dataset(), cfg);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("training diverged at epoch"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsEmptySplit) {
  const auto cfg = config({3, 4, 1});
  auto [net, state] = init_network(cfg);
  auto d = linear_dataset();
  d.split_index = d.samples.size();
  EXPECT_THROW(train(net, state, d, cfg), std::invalid_argument);
}
