#include "letterbox.hpp"

#include <cmath>

namespace fsd {

namespace {
constexpr uint8_t kPadGray = 114;
} // namespace

LetterboxResult letterbox(const ImageU8& img, int target_w, int target_h, int max_stride) {
    if (max_stride < 1 || target_w % max_stride || target_h % max_stride)
        raise(Errc::config, "letterbox target must be divisible by the largest stride");

    LetterboxResult res;
    if (img.width == target_w && img.height == target_h) {
        res.image = img;
        res.transform = LetterboxTransform{};
        return res;
    }

    double scale = std::min(static_cast<double>(target_w) / img.width,
                            static_cast<double>(target_h) / img.height);
    int scaled_w = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    int scaled_h = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    ImageU8 scaled = resize_bilinear(img, scaled_w, scaled_h);

    int pad_x = (target_w - scaled_w) / 2;
    int pad_y = (target_h - scaled_h) / 2;
    ImageU8 out(target_w, target_h, img.channels);
    std::fill(out.pixels.begin(), out.pixels.end(), kPadGray);
    for (int y = 0; y < scaled_h; ++y)
        for (int x = 0; x < scaled_w; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y + pad_y, x + pad_x, c) = scaled.at(y, x, c);

    res.image = std::move(out);
    res.transform.scale = scale;
    res.transform.offset_x = pad_x;
    res.transform.offset_y = pad_y;
    return res;
}

} // namespace fsd
