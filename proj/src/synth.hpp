#pragma once

#include "image.hpp"
#include "manifest.hpp"

namespace fsd {

enum class BackgroundMode : int { solid = 0, gradient = 1, textured = 2 };
BackgroundMode background_from_name(const std::string& name);
const char* background_name(BackgroundMode m);

// Procedural dataset of warm-toned blobs ("fire") and gray plumes ("smoke")
// alpha-composited over configurable backgrounds, with exact ground-truth
// boxes. The foreground opacity range is the experiment's control variable:
// low alpha yields the indistinct target boundaries the attention head is
// meant to handle. Pixel-deterministic per seed.
struct SynthSpec {
    int count = 10;
    int image_h = 64;
    int image_w = 64;
    double alpha_lo = 1.0;
    double alpha_hi = 1.0;
    int objects_min = 1;
    int objects_max = 2;
    BackgroundMode background = BackgroundMode::textured;
    uint64_t seed = 0;

    void validate() const {
        if (count < 1) raise(Errc::invalid_argument, "synth count must be >= 1");
        if (image_h < 32 || image_w < 32) raise(Errc::invalid_argument, "synth images must be >= 32px");
        if (!(alpha_lo > 0.0 && alpha_lo <= alpha_hi && alpha_hi <= 1.0))
            raise(Errc::invalid_argument, "alpha range must satisfy 0 < lo <= hi <= 1");
        if (objects_min < 0 || objects_max < objects_min)
            raise(Errc::invalid_argument, "bad objects-per-image range");
    }
};

// Renders every image into out_dir ("<name>-NNNNNN.ppm") and returns the
// manifest (paths relative to out_dir, base_dir set). Byte-identical per spec.
Manifest synth_transparent(const SynthSpec& spec, const std::string& out_dir,
                           const std::string& name = "synth");

// The background of image `index` alone, exactly as it appears under the
// composite. Exposed so tests can separate painted pixels from background.
ImageU8 render_synth_background(const SynthSpec& spec, int index);

} // namespace fsd
