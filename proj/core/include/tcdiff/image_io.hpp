#ifndef TCDIFF_IMAGE_IO_HPP
#define TCDIFF_IMAGE_IO_HPP

#include <filesystem>
#include <string>

#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Lossless 8-bit binary PGM (grayscale, 1 channel) and PPM (RGB, 3 channels).
// Tensors are (C,H,W) in [0,1]; values are clamped before quantization and
// written/read with round-trip-stable rounding.

void write_image(const std::filesystem::path& path, const Tensor& img);
Tensor read_image(const std::filesystem::path& path);

// 0/1 mask stored as PGM with values {0, 255}
void write_mask(const std::filesystem::path& path, const Tensor& mask);
Tensor read_mask(const std::filesystem::path& path);

double clamp01(double v);
Tensor clamp01(const Tensor& t);

// quantize to the 8-bit grid exactly as the files store it
Tensor quantize8(const Tensor& t);

}  // namespace tcdiff

#endif
