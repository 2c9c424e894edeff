#include "spt/patchset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "spt/tensor.hpp"

namespace spt {

namespace {

// Box start along one axis: the size-wide window whose centre is nearest the
// segment centre (round half up), shifted inward so the box stays in-bounds.
// When the image is smaller than the box the box is anchored at 0 and the
// copy range is clipped by the image extent.
int box_start(double center, int size, int extent) {
    int lo = static_cast<int>(std::floor(center - size / 2.0 + 0.5));
    if (lo + size > extent) lo = extent - size;
    if (lo < 0) lo = 0;
    return lo;
}

}  // namespace

SuperpixelPatchSet get_superpixel_patches(const Image& image,
                                          const SegmentMask& segments,
                                          const PatchConfig& config) {
    check(image.height == segments.height && image.width == segments.width,
          "get_superpixel_patches: image/segments shape mismatch");
    check(segments.n_segments <= config.max_patches,
          "get_superpixel_patches: more segments than max_patches");
    check(config.h_chunk >= 1 && config.w_chunk >= 1 && config.max_patches >= 1,
          "get_superpixel_patches: invalid config");

    const int h = image.height, w = image.width;
    SuperpixelPatchSet ps;
    ps.max_patches = config.max_patches;
    ps.h_chunk = config.h_chunk;
    ps.w_chunk = config.w_chunk;
    ps.present.assign(config.max_patches, 0);
    ps.centers.assign(static_cast<size_t>(config.max_patches) * 2, 0.0);
    ps.patches.assign(static_cast<size_t>(config.max_patches) * ps.patch_stride(), 0.0f);
    ps.patch_present.assign(static_cast<size_t>(config.max_patches) * ps.mask_stride(), 0);

    const int n = segments.n_segments;
    std::vector<int> min_y(n, std::numeric_limits<int>::max()), min_x(n, std::numeric_limits<int>::max());
    std::vector<int> max_y(n, -1), max_x(n, -1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int s = segments.at(y, x);
            min_y[s] = std::min(min_y[s], y);
            max_y[s] = std::max(max_y[s], y);
            min_x[s] = std::min(min_x[s], x);
            max_x[s] = std::max(max_x[s], x);
        }

    for (int i = 0; i < n; ++i) {
        check(max_y[i] >= 0, "get_superpixel_patches: empty segment");
        ps.present[i] = 1;
        const double cy = min_y[i] + (max_y[i] - min_y[i]) / 2.0;
        const double cx = min_x[i] + (max_x[i] - min_x[i]) / 2.0;
        ps.centers[2 * i] = cy;
        ps.centers[2 * i + 1] = cx;
        const int sps = config.search_patch_size;
        const int y0 = box_start(cy, sps, h);
        const int x0 = box_start(cx, sps, w);
        const int y1 = std::min(h, y0 + sps);
        const int x1 = std::min(w, x0 + sps);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                if (segments.at(y, x) != i) continue;
                const int by = y - y0, bx = x - x0;
                if (by >= config.h_chunk || bx >= config.w_chunk) continue;
                for (int c = 0; c < 3; ++c)
                    ps.patch_at(i, c, by, bx) = static_cast<float>(image.at(c, y, x));
                ps.mask_at(i, by, bx) = 1;
            }
    }
    return ps;
}

void write_patchset(const SuperpixelPatchSet& ps, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    const int32_t hdr[3] = {ps.max_patches, ps.h_chunk, ps.w_chunk};
    f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    f.write(reinterpret_cast<const char*>(ps.present.data()), ps.present.size());
    f.write(reinterpret_cast<const char*>(ps.centers.data()),
            sizeof(double) * ps.centers.size());
    f.write(reinterpret_cast<const char*>(ps.patches.data()),
            sizeof(float) * ps.patches.size());
    f.write(reinterpret_cast<const char*>(ps.patch_present.data()),
            ps.patch_present.size());
}

SuperpixelPatchSet read_patchset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    int32_t hdr[3];
    f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    SuperpixelPatchSet ps;
    ps.max_patches = hdr[0];
    ps.h_chunk = hdr[1];
    ps.w_chunk = hdr[2];
    ps.present.resize(ps.max_patches);
    ps.centers.resize(static_cast<size_t>(ps.max_patches) * 2);
    ps.patches.resize(static_cast<size_t>(ps.max_patches) * ps.patch_stride());
    ps.patch_present.resize(static_cast<size_t>(ps.max_patches) * ps.mask_stride());
    f.read(reinterpret_cast<char*>(ps.present.data()), ps.present.size());
    f.read(reinterpret_cast<char*>(ps.centers.data()), sizeof(double) * ps.centers.size());
    f.read(reinterpret_cast<char*>(ps.patches.data()), sizeof(float) * ps.patches.size());
    f.read(reinterpret_cast<char*>(ps.patch_present.data()), ps.patch_present.size());
    check(f.good(), "truncated patchset file " + path);
    return ps;
}

}  // namespace spt
