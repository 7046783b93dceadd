#include "advbench/adversary_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace advbench {

using nlohmann::json;

std::uint64_t hash_bytes(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash_file: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (n < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<char*>(b), 8);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("adversary set: truncated tensor file header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("adversary set: truncated tensor file header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        write_u64(out, bits);
    }
}

void read_doubles(std::istream& in, std::vector<double>& v) {
    for (double& d : v) {
        std::uint64_t bits = read_u64(in);
        std::memcpy(&d, &bits, 8);
    }
    if (!in) throw std::runtime_error("adversary set: truncated tensor payload");
}

}  // namespace

void save_adversary_set(const std::vector<AdversarialExample>& set, AttackKind kind,
                        const std::string& dir, std::uint64_t source_model_hash) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    Shape shape = set.empty() ? Shape{} : set.front().original.shape();
    for (const AdversarialExample& ex : set) {
        if (ex.original.shape() != shape || ex.perturbed.shape() != shape)
            throw std::invalid_argument("save_adversary_set: mixed tensor shapes");
    }

    {
        std::ofstream bin(dir + "/tensors.bin", std::ios::binary);
        if (!bin) throw std::runtime_error("cannot write " + dir + "/tensors.bin");
        write_u64(bin, set.size());
        write_u32(bin, static_cast<std::uint32_t>(shape.size()));
        for (std::size_t d : shape) write_u64(bin, d);
        for (const AdversarialExample& ex : set) {
            write_doubles(bin, ex.original.data());
            write_doubles(bin, ex.perturbed.data());
        }
    }

    double mean_dist = 0.0;
    for (const AdversarialExample& ex : set) mean_dist += ex.distortion;
    if (!set.empty()) mean_dist /= static_cast<double>(set.size());

    json manifest;
    manifest["kind"] = attack_kind_name(kind);
    manifest["count"] = set.size();
    manifest["source_model_hash"] = source_model_hash;
    manifest["mean_distortion"] = mean_dist;
    manifest["shape"] = shape;
    json labels = json::array(), preds = json::array(), dists = json::array(),
         fooled = json::array();
    std::size_t fool_count = 0;
    for (const AdversarialExample& ex : set) {
        labels.push_back(ex.true_label);
        preds.push_back(ex.source_prediction);
        dists.push_back(ex.distortion);
        fooled.push_back(ex.fooled);
        if (ex.fooled) ++fool_count;
    }
    manifest["fooled_count"] = fool_count;
    manifest["true_labels"] = std::move(labels);
    manifest["source_predictions"] = std::move(preds);
    manifest["distortions"] = std::move(dists);
    manifest["fooled"] = std::move(fooled);

    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("cannot write " + dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
}

std::vector<AdversarialExample> load_adversary_set(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("cannot open " + dir + "/manifest.json");
    json manifest;
    mf >> manifest;

    AttackKind kind = attack_kind_from_name(manifest.at("kind").get<std::string>());
    std::size_t count = manifest.at("count").get<std::size_t>();

    std::ifstream bin(dir + "/tensors.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + dir + "/tensors.bin");
    std::uint64_t bin_count = read_u64(bin);
    if (bin_count != count)
        throw std::runtime_error("adversary set: manifest/tensor count mismatch");
    std::uint32_t ndim = read_u32(bin);
    Shape shape;
    for (std::uint32_t i = 0; i < ndim; ++i) shape.push_back(read_u64(bin));

    std::vector<AdversarialExample> set;
    std::size_t numel = shape_numel(shape);
    for (std::size_t i = 0; i < count; ++i) {
        AdversarialExample ex;
        std::vector<double> orig(numel), pert(numel);
        read_doubles(bin, orig);
        read_doubles(bin, pert);
        ex.original = Tensor(shape, std::move(orig));
        ex.perturbed = Tensor(shape, std::move(pert));
        ex.true_label = manifest.at("true_labels")[i].get<int>();
        ex.source_prediction = manifest.at("source_predictions")[i].get<int>();
        ex.distortion = manifest.at("distortions")[i].get<double>();
        ex.fooled = manifest.at("fooled")[i].get<bool>();
        ex.kind = kind;
        set.push_back(std::move(ex));
    }
    return set;
}

}  // namespace advbench
