#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spt/image.hpp"
#include "spt/segmentation.hpp"

namespace spt {

struct PatchConfig {
    int max_patches = 0;
    int h_chunk = 0;
    int w_chunk = 0;
    int search_patch_size = 0;  // equals h_chunk = w_chunk = 3*S
};

// Fixed-size batched patch structure. Slot i holds segment i's pixels copied
// into a search box centred on the segment's bounding-box center.
struct SuperpixelPatchSet {
    int max_patches = 0;
    int h_chunk = 0;
    int w_chunk = 0;
    std::vector<uint8_t> present;        // max_patches
    std::vector<double> centers;         // max_patches x 2, (y,x) pixel units
    std::vector<float> patches;          // max_patches x 3 x h_chunk x w_chunk
    std::vector<uint8_t> patch_present;  // max_patches x 1 x h_chunk x w_chunk

    size_t patch_stride() const { return static_cast<size_t>(3) * h_chunk * w_chunk; }
    size_t mask_stride() const { return static_cast<size_t>(h_chunk) * w_chunk; }

    float& patch_at(int i, int c, int y, int x) {
        return patches[i * patch_stride() + (static_cast<size_t>(c) * h_chunk + y) * w_chunk + x];
    }
    float patch_at(int i, int c, int y, int x) const {
        return patches[i * patch_stride() + (static_cast<size_t>(c) * h_chunk + y) * w_chunk + x];
    }
    uint8_t& mask_at(int i, int y, int x) {
        return patch_present[i * mask_stride() + static_cast<size_t>(y) * w_chunk + x];
    }
    uint8_t mask_at(int i, int y, int x) const {
        return patch_present[i * mask_stride() + static_cast<size_t>(y) * w_chunk + x];
    }
};

SuperpixelPatchSet get_superpixel_patches(const Image& image,
                                          const SegmentMask& segments,
                                          const PatchConfig& config);

// Binary dump: header (max_patches, h_chunk, w_chunk as 4-byte LE), then
// present bytes, centers as 8-byte floats, patches as 4-byte floats,
// patch_present bytes, each contiguous row-major.
void write_patchset(const SuperpixelPatchSet& ps, const std::string& path);
SuperpixelPatchSet read_patchset(const std::string& path);

}  // namespace spt
