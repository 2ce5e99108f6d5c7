#pragma once

#include <string>
#include <vector>

#include "eval.hpp"

namespace fsd {

enum class Split : int { all = 0, train = 1, test = 2 };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

// One dataset image with its ground-truth annotations (no confidences).
// Boxes are clipped to the image bounds at construction time.
struct ImageRecord {
    std::string image_id;
    std::string path;  // image file, relative paths resolve against the manifest
    int width = 0;
    int height = 0;
    std::vector<LabeledBox> annotations;
};

struct Manifest {
    std::string name;
    Split split = Split::all;
    std::vector<ImageRecord> records;
    std::string base_dir;  // directory the manifest was loaded from, if any

    std::string resolve_path(const ImageRecord& rec) const;
    void validate() const;  // unique ids, in-bounds boxes
};

// Clip a box to [0,w]x[0,h]; boxes with no in-bounds area are schema errors.
BBox clip_box_to_image(const BBox& box, int width, int height);

// Line format: image_id,path,width,height,class,cx,cy,w,h;class,cx,cy,w,h;...
// A `#manifest name=... split=...` first line carries the metadata.
void save_manifest(const Manifest& manifest, const std::string& path);
Manifest load_manifest(const std::string& path);

// Seeded shuffle then prefix split; deterministic, disjoint, exhaustive.
std::pair<Manifest, Manifest> split_manifest(const Manifest& manifest, double train_fraction,
                                             uint64_t seed);

// Ground-truth boxes grouped per image, for the evaluator.
BoxesByImage manifest_gts(const Manifest& manifest);

} // namespace fsd
