#include "frames.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rng.hpp"

namespace fsd {

namespace {

uint8_t clamp_u8(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// BT.601 limited-range YCbCr -> RGB
void yuv_to_rgb(double y, double u, double v, uint8_t* rgb) {
    double c = y - 16.0, d = u - 128.0, e = v - 128.0;
    rgb[0] = clamp_u8(1.164 * c + 1.596 * e);
    rgb[1] = clamp_u8(1.164 * c - 0.392 * d - 0.813 * e);
    rgb[2] = clamp_u8(1.164 * c + 2.017 * d);
}

enum class Chroma { c420, c444, mono };

std::vector<ImageU8> decode_y4m(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot read video " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("YUV4MPEG2", 0) != 0)
        raise(Errc::io, "not a YUV4MPEG2 stream: " + path);

    int w = 0, h = 0;
    Chroma chroma = Chroma::c420;
    std::istringstream hdr(header);
    std::string tok;
    hdr >> tok;  // magic
    while (hdr >> tok) {
        if (tok[0] == 'W') w = std::stoi(tok.substr(1));
        else if (tok[0] == 'H') h = std::stoi(tok.substr(1));
        else if (tok[0] == 'C') {
            std::string cs = tok.substr(1);
            if (cs.rfind("420", 0) == 0) chroma = Chroma::c420;
            else if (cs == "444") chroma = Chroma::c444;
            else if (cs == "mono") chroma = Chroma::mono;
            else raise(Errc::io, "unsupported y4m colourspace C" + cs + ": " + path);
        }
    }
    if (w < 1 || h < 1) raise(Errc::io, "y4m header missing dimensions: " + path);

    size_t ysize = static_cast<size_t>(w) * h;
    size_t csize = chroma == Chroma::c444 ? ysize
                   : chroma == Chroma::c420 ? static_cast<size_t>((w + 1) / 2) * ((h + 1) / 2)
                                            : 0;
    std::vector<uint8_t> yp(ysize), up(csize), vp(csize);

    std::vector<ImageU8> frames;
    std::string frame_line;
    while (std::getline(in, frame_line)) {
        if (frame_line.rfind("FRAME", 0) != 0)
            raise(Errc::io, "malformed y4m frame marker: " + path);
        in.read(reinterpret_cast<char*>(yp.data()), static_cast<std::streamsize>(ysize));
        if (csize) {
            in.read(reinterpret_cast<char*>(up.data()), static_cast<std::streamsize>(csize));
            in.read(reinterpret_cast<char*>(vp.data()), static_cast<std::streamsize>(csize));
        }
        if (!in) raise(Errc::io, "truncated y4m frame: " + path);

        ImageU8 img(w, h, 3);
        int cw = (w + 1) / 2;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double Y = yp[static_cast<size_t>(y) * w + x];
                double U = 128, V = 128;
                if (chroma == Chroma::c444) {
                    U = up[static_cast<size_t>(y) * w + x];
                    V = vp[static_cast<size_t>(y) * w + x];
                } else if (chroma == Chroma::c420) {
                    size_t ci = static_cast<size_t>(y / 2) * cw + x / 2;
                    U = up[ci];
                    V = vp[ci];
                }
                yuv_to_rgb(Y, U, V, &img.at(y, x, 0));
            }
        frames.push_back(std::move(img));
    }
    if (frames.empty()) raise(Errc::io, "y4m stream contains no frames: " + path);
    return frames;
}

std::vector<ImageU8> decode_frame_dir(const std::string& path) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path().string());
    }
    if (files.empty()) raise(Errc::io, "frame directory has no .ppm/.pgm files: " + path);
    std::sort(files.begin(), files.end());
    std::vector<ImageU8> frames;
    for (const auto& f : files) frames.push_back(load_image(f));
    return frames;
}

} // namespace

std::vector<ImageU8> decode_video(const std::string& path) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) return decode_frame_dir(path);
    if (!std::filesystem::exists(path, ec)) raise(Errc::io, "no such video: " + path);
    if (std::filesystem::path(path).extension() == ".y4m") return decode_y4m(path);
    raise(Errc::io, "undecodable video (expected .y4m or a frame directory): " + path);
}

std::vector<size_t> allocate_frame_budget(const std::vector<size_t>& frame_counts, size_t budget) {
    size_t total = 0;
    for (size_t n : frame_counts) total += n;
    std::vector<size_t> alloc(frame_counts.size(), 0);
    if (total <= budget) return frame_counts;
    if (frame_counts.empty()) return alloc;

    std::vector<double> ideal(frame_counts.size());
    size_t assigned = 0;
    for (size_t i = 0; i < frame_counts.size(); ++i) {
        ideal[i] = static_cast<double>(budget) * static_cast<double>(frame_counts[i]) /
                   static_cast<double>(total);
        alloc[i] = std::min(frame_counts[i], static_cast<size_t>(std::floor(ideal[i])));
        assigned += alloc[i];
    }
    while (assigned < budget) {
        // hand the next slot to the largest outstanding remainder
        double best = -1.0;
        size_t pick = frame_counts.size();
        for (size_t i = 0; i < frame_counts.size(); ++i) {
            if (alloc[i] >= frame_counts[i]) continue;
            double remainder = ideal[i] - static_cast<double>(alloc[i]);
            if (remainder > best) {
                best = remainder;
                pick = i;
            }
        }
        if (pick == frame_counts.size()) break;  // everything capped
        ++alloc[pick];
        ++assigned;
    }
    return alloc;
}

std::vector<ImageRecord> extract_frames(const std::string& video_path, size_t budget,
                                        uint64_t seed, const std::string& out_dir) {
    if (budget < 1) raise(Errc::invalid_argument, "frame budget must be >= 1");
    auto frames = decode_video(video_path);

    std::string stem = std::filesystem::path(video_path).stem().string();
    if (stem.empty()) stem = "video";
    Rng rng(derive_seed(seed, "frames-" + stem));
    auto keep = rng.sample_indices(frames.size(), std::min(budget, frames.size()));

    std::filesystem::create_directories(out_dir);
    std::vector<ImageRecord> records;
    for (size_t idx : keep) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%06zu", idx);
        ImageRecord rec;
        rec.image_id = stem + "-" + buf;
        rec.path = rec.image_id + ".ppm";
        rec.width = frames[idx].width;
        rec.height = frames[idx].height;
        save_image(frames[idx], (std::filesystem::path(out_dir) / rec.path).string());
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace fsd
