#pragma once

#include <string>
#include <vector>

#include "image.hpp"
#include "manifest.hpp"

namespace fsd {

// Decoded video frames in presentation order. Sources:
//   - .y4m files (uncompressed YUV4MPEG2; C420 variants, C444, Cmono)
//   - directories of .ppm/.pgm frame images, ordered by filename
// Anything else is an ingest error.
std::vector<ImageU8> decode_video(const std::string& path);

// Exact total-budget split proportional to per-video frame counts (largest
// remainder, ties to the earlier video), each share capped by availability.
std::vector<size_t> allocate_frame_budget(const std::vector<size_t>& frame_counts, size_t budget);

// Uniform-stride decode then seeded subsampling without replacement down to
// min(budget, frames), preserving temporal order. Frames are written to
// out_dir as PPM files named <video-stem>-NNNNNN.ppm.
std::vector<ImageRecord> extract_frames(const std::string& video_path, size_t budget,
                                        uint64_t seed, const std::string& out_dir);

} // namespace fsd
