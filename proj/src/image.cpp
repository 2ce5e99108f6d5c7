#include "image.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace fsd {

void save_image(const ImageU8& img, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(Errc::io, "cannot write image " + tmp);
        out << (img.channels == 3 ? "P6" : "P5") << "\n"
            << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.pixels.data()),
                  static_cast<std::streamsize>(img.pixels.size()));
        if (!out) raise(Errc::io, "failed writing image " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

namespace {

int read_pnm_token(std::istream& in, const std::string& path) {
    // skips whitespace and '#' comments per the NetPBM grammar
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF) raise(Errc::io, "truncated image header: " + path);
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) raise(Errc::io, "malformed image header: " + path);
    return value;
}

} // namespace

ImageU8 load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot read image " + path);
    char p, kind;
    in.get(p);
    in.get(kind);
    if (!in || p != 'P' || (kind != '5' && kind != '6'))
        raise(Errc::io, "unsupported image format (want P5/P6 pnm): " + path);
    int w = read_pnm_token(in, path);
    int h = read_pnm_token(in, path);
    int maxval = read_pnm_token(in, path);
    if (maxval != 255) raise(Errc::io, "unsupported pnm maxval: " + path);
    ImageU8 img(w, h, kind == '6' ? 3 : 1);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) raise(Errc::io, "truncated image data: " + path);
    return img;
}

Tensor image_to_tensor(const ImageU8& img) {
    Tensor t(3, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                t.at(c, y, x) = img.at(y, x, img.channels == 3 ? c : 0) / 255.0;
    return t;
}

ImageU8 tensor_to_image(const Tensor& t) {
    ImageU8 img(t.w, t.h, t.c == 1 ? 1 : 3);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double v = std::clamp(t.at(std::min(c, t.c - 1), y, x), 0.0, 1.0);
                img.at(y, x, c) = static_cast<uint8_t>(std::lround(v * 255.0));
            }
    return img;
}

ImageU8 resize_bilinear(const ImageU8& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) raise(Errc::invalid_argument, "bad resize target");
    ImageU8 out(out_w, out_h, img.channels);
    double sx = static_cast<double>(img.width) / out_w;
    double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = std::min(y0 + 1, img.height - 1);
        y0 = std::clamp(y0, 0, img.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = std::min(x0 + 1, img.width - 1);
            x0 = std::clamp(x0, 0, img.width - 1);
            for (int c = 0; c < img.channels; ++c) {
                double v = (1 - wy) * ((1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c)) +
                           wy * ((1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c));
                out.at(y, x, c) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return out;
}

ImageU8 hflip(const ImageU8& img) {
    ImageU8 out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    return out;
}

} // namespace fsd
