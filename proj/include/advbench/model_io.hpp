#ifndef ADVBENCH_MODEL_IO_HPP
#define ADVBENCH_MODEL_IO_HPP

#include <string>

#include <json.hpp>

#include "advbench/network.hpp"

namespace advbench {

// Versioned JSON model document:
//   {"format_version":1,
//    "config":{"input_shape":[...], "num_classes":K, "seed":..., "layers":[{...}]},
//    "layers":[{"kind":"dense", "shape":[...], "weights":[row-major floats]}, ...]}
// Each "layers" entry carries that layer's output shape and the row-major
// concatenation of its parameter tensors (empty for parameterless layers).
constexpr int kModelFormatVersion = 1;

nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

nlohmann::json layer_spec_to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& j);

nlohmann::json network_config_to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const nlohmann::json& j);

}  // namespace advbench

#endif
