#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace fsd {

// Interleaved 8-bit image, 1 (gray) or 3 (RGB) channels.
struct ImageU8 {
    int width = 0, height = 0, channels = 3;
    std::vector<uint8_t> pixels;  // row-major, interleaved

    ImageU8() = default;
    ImageU8(int w, int h, int c) : width(w), height(h), channels(c) {
        if (w < 1 || h < 1 || (c != 1 && c != 3)) raise(Errc::invalid_argument, "bad image shape");
        pixels.assign(static_cast<size_t>(w) * h * c, 0);
    }

    uint8_t& at(int y, int x, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

// Binary NetPBM: P6 for RGB, P5 for grayscale. Deterministic bytes.
void save_image(const ImageU8& img, const std::string& path);
ImageU8 load_image(const std::string& path);

// (3, H, W) tensor in [0, 1]; grayscale is replicated across channels.
Tensor image_to_tensor(const ImageU8& img);
ImageU8 tensor_to_image(const Tensor& t);  // clamps to [0,1] and quantizes

// Bilinear resize (deterministic arithmetic).
ImageU8 resize_bilinear(const ImageU8& img, int out_w, int out_h);

ImageU8 hflip(const ImageU8& img);

} // namespace fsd
