#pragma once

#include "geometry.hpp"
#include "image.hpp"

namespace fsd {

// Affine metadata of a letterbox resize: target = source * scale + offset.
// Exactly invertible, so boxes can be mapped in either direction.
struct LetterboxTransform {
    double scale = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;

    BBox apply(const BBox& b) const {
        return BBox(b.cx * scale + offset_x, b.cy * scale + offset_y, b.w * scale, b.h * scale);
    }
    BBox invert(const BBox& b) const {
        return BBox((b.cx - offset_x) / scale, (b.cy - offset_y) / scale, b.w / scale,
                    b.h / scale);
    }
    bool identity() const { return scale == 1.0 && offset_x == 0.0 && offset_y == 0.0; }
};

struct LetterboxResult {
    ImageU8 image;
    LetterboxTransform transform;
};

// Aspect-preserving resize onto target_w x target_h with centered neutral-gray
// padding. The target must be divisible by the detector's largest stride;
// callers pass that stride (use 1 to skip the check).
LetterboxResult letterbox(const ImageU8& img, int target_w, int target_h, int max_stride);

} // namespace fsd
