#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spt/image.hpp"

namespace spt {

// Per-pixel superpixel labels. Labels are contiguous in [0, n_segments).
struct SegmentMask {
    int height = 0;
    int width = 0;
    int n_segments = 0;
    std::vector<int32_t> labels;  // row-major, size height*width

    int32_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
    int32_t& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
};

struct SlicConfig {
    int k = 49;                        // requested superpixel count
    int spacing = 4;                   // S, expected spacing in pixels
    int max_iterations = 10;
    double convergence_threshold = 1e-3;
};

// Chunks a square image into patch_size x patch_size blocks. Label of pixel
// (y,x) is iy*sqrt(n) + ix with iy = y/patch_size, ix = x/patch_size.
SegmentMask square_grid_segments(int height, int width, int patch_size);

// SLIC0 clustering: k-means on (r,g,b,y,x) with the search restricted to a
// 2S window per cluster and a per-cluster adaptive color normalizer. A
// connectivity post-pass merges small orphaned fragments and relabels to a
// contiguous range; the resulting segment count may differ from k.
SegmentMask slic0_segments(const Image& image, const SlicConfig& config);

// Debug dump: 8-byte header (height, width as 4-byte LE) then row-major
// 4-byte LE labels.
void write_segment_mask(const SegmentMask& mask, const std::string& path);
SegmentMask read_segment_mask(const std::string& path);

}  // namespace spt
