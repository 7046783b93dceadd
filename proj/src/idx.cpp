#include "advbench/idx.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace advbench {

namespace {

constexpr std::uint32_t kImagesMagic = 2051;
constexpr std::uint32_t kLabelsMagic = 2049;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("idx: truncated file while reading " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("idx: cannot open " + path);
    return in;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img = open_binary(images_path);
    std::uint32_t magic = read_be32(img, "images magic");
    if (magic != kImagesMagic)
        throw std::runtime_error("idx: bad images magic " + std::to_string(magic) + " in " +
                                 images_path + " (expected 2051)");
    std::uint32_t count = read_be32(img, "image count");
    std::uint32_t rows = read_be32(img, "rows");
    std::uint32_t cols = read_be32(img, "cols");

    std::ifstream lab = open_binary(labels_path);
    magic = read_be32(lab, "labels magic");
    if (magic != kLabelsMagic)
        throw std::runtime_error("idx: bad labels magic " + std::to_string(magic) + " in " +
                                 labels_path + " (expected 2049)");
    std::uint32_t label_count = read_be32(lab, "label count");
    if (label_count != count)
        throw std::runtime_error("idx: image count " + std::to_string(count) +
                                 " != label count " + std::to_string(label_count));

    Dataset data;
    std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> buf(pixels);
    int max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
            throw std::runtime_error("idx: truncated image payload at sample " + std::to_string(i));
        Tensor image(Shape{1, rows, cols});
        for (std::size_t p = 0; p < pixels; ++p) image[p] = buf[p] / 255.0;
        char lb;
        if (!lab.read(&lb, 1))
            throw std::runtime_error("idx: truncated label payload at sample " + std::to_string(i));
        int label = static_cast<unsigned char>(lb);
        max_label = std::max(max_label, label);
        data.samples.push_back({std::move(image), label});
    }
    data.num_classes = max_label + 1;
    return data;
}

Dataset downsample(const Dataset& data, int factor, std::size_t max_samples) {
    if (factor <= 0) throw std::invalid_argument("downsample: factor must be positive");
    Dataset out;
    out.num_classes = data.num_classes;
    std::size_t limit = max_samples ? std::min(max_samples, data.size()) : data.size();
    for (std::size_t i = 0; i < limit; ++i) {
        const Sample& s = data.samples[i];
        const Shape& sh = s.image.shape();
        if (sh.size() != 3) throw std::invalid_argument("downsample: images must be 3-d");
        std::size_t c = sh[0], h = sh[1] / factor, w = sh[2] / factor;
        Tensor small(Shape{c, h, w});
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    double acc = 0.0;
                    for (int dy = 0; dy < factor; ++dy)
                        for (int dx = 0; dx < factor; ++dx)
                            acc += s.image[(ch * sh[1] + y * factor + dy) * sh[2] + x * factor + dx];
                    small[(ch * h + y) * w + x] = acc / (factor * factor);
                }
        out.samples.push_back({std::move(small), s.label});
    }
    return out;
}

}  // namespace advbench
