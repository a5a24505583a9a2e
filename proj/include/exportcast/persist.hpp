#pragma once

#include "exportcast/error.hpp"
#include "exportcast/evaluate.hpp"
#include "exportcast/mlp.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

// Model file layout, all integers and floats little-endian:
//   char[8]  magic "EXPCAST\0"
//   u32      format version (1)
//   u32      hidden activation (0 relu, 1 sigmoid, 2 identity)
//   u64      seed
//   u32      number of layer sizes L, then L x u32 sizes
//   f64...   per layer: weights row-major (inputs x outputs), then biases
inline constexpr char kModelMagic[8] = {'E', 'X', 'P', 'C', 'A', 'S', 'T', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

struct StoredModel {
  Network network;
  std::uint64_t seed = 0;
};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (pos_ + sizeof(U) > bytes_.size()) throw Error("model file truncated");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error("model file truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string save_model(const Network& net, std::uint64_t seed) {
  std::string out(kModelMagic, sizeof kModelMagic);
  detail::put_le(out, kModelVersion);
  detail::put_le(out, static_cast<std::uint32_t>(net.hidden_activation));
  detail::put_le(out, seed);
  const auto sizes = net.layer_sizes();
  detail::put_le(out, static_cast<std::uint32_t>(sizes.size()));
  for (auto s : sizes) detail::put_le(out, static_cast<std::uint32_t>(s));
  for (const auto& layer : net.layers) {
    for (double w : layer.weights) detail::put_le(out, w);
    for (double b : layer.biases) detail::put_le(out, b);
  }
  return out;
}

inline StoredModel load_model(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.take(sizeof kModelMagic) != std::string_view(kModelMagic, sizeof kModelMagic)) {
    throw Error("not a model file (bad magic)");
  }
  if (const auto v = in.get<std::uint32_t>(); v != kModelVersion) {
    throw Error("unsupported model format version " + std::to_string(v));
  }
  const auto act = in.get<std::uint32_t>();
  if (act > 2) throw Error("model file: unknown activation code " + std::to_string(act));

  StoredModel m;
  m.network.hidden_activation = static_cast<Activation>(act);
  m.seed = in.get<std::uint64_t>();
  const auto count = in.get<std::uint32_t>();
  if (count < 2 || count > 1024) throw Error("model file: implausible layer count");
  std::vector<std::size_t> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    sizes.push_back(in.get<std::uint32_t>());
    if (sizes.back() == 0) throw Error("model file: zero-width layer");
  }
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer layer(sizes[k], sizes[k + 1]);
    for (double& w : layer.weights) w = in.get<double>();
    for (double& b : layer.biases) b = in.get<double>();
    m.network.layers.push_back(std::move(layer));
  }
  if (!in.done()) throw Error("model file: trailing bytes");
  return m;
}

using Json = nlohmann::ordered_json;

inline Json to_json(const NetworkConfig& cfg) {
  return Json{{"layer_sizes", cfg.layer_sizes},
              {"activation", std::string(to_string(cfg.hidden_activation))},
              {"epochs", cfg.epochs},
              {"learning_rate", cfg.learning_rate},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"epsilon", cfg.epsilon},
              {"seed", cfg.seed}};
}

inline NetworkConfig network_config_from_json(const Json& j) {
  NetworkConfig cfg;
  cfg.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  cfg.hidden_activation = parse_activation(j.at("activation").get<std::string>());
  cfg.epochs = j.at("epochs").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.beta1 = j.at("beta1").get<double>();
  cfg.beta2 = j.at("beta2").get<double>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline Json to_json(const TrainReport& r) {
  return Json{{"seed", r.seed},
              {"epochs", r.mse_history.size()},
              {"train", {{"mse", r.train_mse}, {"mae", r.train_mae}}},
              {"test", {{"mse", r.test_mse}, {"mae", r.test_mae}}},
              {"config", to_json(r.config)},
              {"mse_history", r.mse_history}};
}

inline TrainReport train_report_from_json(const Json& j) {
  TrainReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.train_mse = j.at("train").at("mse").get<double>();
  r.train_mae = j.at("train").at("mae").get<double>();
  r.test_mse = j.at("test").at("mse").get<double>();
  r.test_mae = j.at("test").at("mae").get<double>();
  r.config = network_config_from_json(j.at("config"));
  r.mse_history = j.at("mse_history").get<std::vector<double>>();
  return r;
}

}  // namespace exportcast
