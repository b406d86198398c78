#include "tcdiff/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace tcdiff {

double clamp01(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

Tensor clamp01(const Tensor& t) {
    Tensor out = t;
    for (size_t i = 0; i < out.size(); ++i) out[i] = clamp01(out[i]);
    return out;
}

static uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::lround(clamp01(v) * 255.0));
}

Tensor quantize8(const Tensor& t) {
    Tensor out = t;
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<double>(to_byte(out[i])) / 255.0;
    }
    return out;
}

void write_image(const std::filesystem::path& path, const Tensor& img) {
    if (img.ndim() != 3 || (img.dim(0) != 1 && img.dim(0) != 3)) {
        throw std::invalid_argument("write_image: expected (1|3,H,W) tensor, got " +
                                    img.shape_str());
    }
    const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_image: cannot open " + path.string());
    f << (c == 1 ? "P5" : "P6") << "\n" << w << " " << h << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(w) * c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                row[static_cast<size_t>(x) * c + ch] = to_byte(img.at(ch, y, x));
            }
        }
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("write_image: write failed for " + path.string());
}

Tensor read_image(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_image: cannot open " + path.string());
    std::string magic;
    f >> magic;
    if (magic != "P5" && magic != "P6") {
        throw std::runtime_error("read_image: unsupported format in " + path.string());
    }
    int w = 0, h = 0, maxval = 0;
    f >> w >> h >> maxval;
    if (w <= 0 || h <= 0 || maxval != 255) {
        throw std::runtime_error("read_image: bad header in " + path.string());
    }
    f.get();  // single whitespace after header
    const int c = (magic == "P5") ? 1 : 3;
    std::vector<uint8_t> buf(static_cast<size_t>(w) * h * c);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("read_image: truncated file " + path.string());
    Tensor img({c, h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                img.at(ch, y, x) =
                    static_cast<double>(buf[(static_cast<size_t>(y) * w + x) * c + ch]) / 255.0;
            }
        }
    }
    return img;
}

void write_mask(const std::filesystem::path& path, const Tensor& mask) {
    Tensor img = mask;
    for (size_t i = 0; i < img.size(); ++i) img[i] = img[i] > 0.5 ? 1.0 : 0.0;
    write_image(path, img);
}

Tensor read_mask(const std::filesystem::path& path) {
    Tensor img = read_image(path);
    for (size_t i = 0; i < img.size(); ++i) img[i] = img[i] > 0.5 ? 1.0 : 0.0;
    return img;
}

}  // namespace tcdiff
