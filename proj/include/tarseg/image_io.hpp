#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tarseg/tensor.hpp"

namespace tarseg {

// Interleaved 8-bit image, row-major. channels is 1 (gray) or 3 (RGB).
struct ImageU8 {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t& at(int y, int x, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Reads PNG (8-bit gray/RGB; alpha is stripped), PGM (P5) or PPM (P6),
// dispatching on the file's magic bytes.
ImageU8 read_image(const std::string& path);

// Writes by extension: .png, .pgm (1 channel), .ppm (3 channels).
void write_image(const std::string& path, const ImageU8& img);

// PNG codecs, 8-bit, non-interlaced. Writing emits gray or RGB.
ImageU8 decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const ImageU8& img);

// [C,H,W] float tensor in [0,1] <-> 8-bit image.
Tensor image_to_tensor(const ImageU8& img);
ImageU8 tensor_to_image(const Tensor& t);

// [H,W] map in [0,1] -> gray image (values scaled by 255 and rounded).
ImageU8 gray_from_map(const Tensor& map);
// Binary [H,W] map -> {0,255} gray image.
ImageU8 gray_from_binary(const Tensor& map);

}  // namespace tarseg
