#include "advbench/model_io.hpp"

#include <fstream>
#include <stdexcept>

namespace advbench {

using nlohmann::json;

json layer_spec_to_json(const LayerSpec& spec) {
    json j;
    j["kind"] = layer_kind_name(spec.kind);
    switch (spec.kind) {
        case LayerKind::Dense: j["units"] = spec.units; break;
        case LayerKind::Conv2d:
            j["filters"] = spec.filters;
            j["filter_size"] = spec.filter_size;
            break;
        case LayerKind::Dropout: j["p"] = spec.dropout_p; break;
        default: break;
    }
    return j;
}

LayerSpec layer_spec_from_json(const json& j) {
    LayerSpec spec;
    spec.kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (spec.kind) {
        case LayerKind::Dense: spec.units = j.at("units").get<std::size_t>(); break;
        case LayerKind::Conv2d:
            spec.filters = j.at("filters").get<std::size_t>();
            spec.filter_size = j.at("filter_size").get<std::size_t>();
            break;
        case LayerKind::Dropout: spec.dropout_p = j.at("p").get<double>(); break;
        default: break;
    }
    return spec;
}

json network_config_to_json(const NetworkConfig& cfg) {
    json j;
    j["input_shape"] = cfg.input_shape;
    j["num_classes"] = cfg.num_classes;
    j["seed"] = cfg.seed;
    j["layers"] = json::array();
    for (const LayerSpec& spec : cfg.layers) j["layers"].push_back(layer_spec_to_json(spec));
    return j;
}

NetworkConfig network_config_from_json(const json& j) {
    NetworkConfig cfg;
    cfg.input_shape = j.at("input_shape").get<Shape>();
    cfg.num_classes = j.at("num_classes").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    for (const json& lj : j.at("layers")) cfg.layers.push_back(layer_spec_from_json(lj));
    return cfg;
}

json network_to_json(const Network& net) {
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["config"] = network_config_to_json(net.config());
    doc["layers"] = json::array();
    for (const auto& layer : net.layers()) {
        json lj;
        lj["kind"] = layer_kind_name(layer->spec().kind);
        lj["shape"] = layer->output_shape();
        std::vector<double> weights;
        for (const Tensor& p : layer->params())
            weights.insert(weights.end(), p.data().begin(), p.data().end());
        lj["weights"] = weights;
        doc["layers"].push_back(lj);
    }
    return doc;
}

Network network_from_json(const json& doc) {
    int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw std::runtime_error("model: unsupported format_version " + std::to_string(version));

    Network net(network_config_from_json(doc.at("config")));
    const json& layers = doc.at("layers");
    if (layers.size() != net.layers().size())
        throw std::runtime_error("model: layer count mismatch");

    for (std::size_t i = 0; i < layers.size(); ++i) {
        const json& lj = layers[i];
        Layer& layer = *net.mutable_layers()[i];
        if (lj.at("kind").get<std::string>() != layer_kind_name(layer.spec().kind))
            throw std::runtime_error("model: layer kind mismatch at index " + std::to_string(i));
        if (lj.at("shape").get<Shape>() != layer.output_shape())
            throw std::runtime_error("model: layer shape mismatch at index " + std::to_string(i));
        auto weights = lj.at("weights").get<std::vector<double>>();
        std::size_t expected = 0;
        for (const Tensor& p : layer.params()) expected += p.size();
        if (weights.size() != expected)
            throw std::runtime_error("model: weight count mismatch at index " + std::to_string(i));
        std::size_t off = 0;
        for (Tensor& p : layer.params()) {
            std::copy(weights.begin() + off, weights.begin() + off + p.size(), p.data().begin());
            off += p.size();
        }
    }
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << network_to_json(net).dump(2) << "\n";
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json doc;
    in >> doc;
    return network_from_json(doc);
}

}  // namespace advbench
