#include "spt/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <queue>

#include "spt/tensor.hpp"

namespace spt {

SegmentMask square_grid_segments(int height, int width, int patch_size) {
    check(height == width, "square_grid_segments: image must be square");
    check(patch_size >= 1 && height % patch_size == 0,
          "square_grid_segments: height must be divisible by patch_size");
    const int nppl = height / patch_size;  // patches per line
    SegmentMask mask;
    mask.height = height;
    mask.width = width;
    mask.n_segments = nppl * nppl;
    mask.labels.resize(static_cast<size_t>(height) * width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            mask.at(y, x) = (y / patch_size) * nppl + (x / patch_size);
    return mask;
}

namespace {

struct Cluster {
    double y = 0, x = 0;
    double r = 0, g = 0, b = 0;
    double max_c2 = 0.01;  // SLIC0 adaptive color normalizer (init m^2, m=0.1)
};

// Relabels so that labels appear in row-major first-occurrence order and
// form a contiguous range.
void relabel_contiguous(SegmentMask& mask) {
    std::map<int32_t, int32_t> seen;
    int32_t next = 0;
    for (auto& l : mask.labels) {
        auto it = seen.find(l);
        if (it == seen.end()) it = seen.emplace(l, next++).first;
        l = it->second;
    }
    mask.n_segments = next;
}

}  // namespace

SegmentMask slic0_segments(const Image& image, const SlicConfig& config) {
    const int h = image.height, w = image.width;
    check(h > 0 && w > 0, "slic0_segments: empty image");
    check(config.k >= 1 && config.k <= h * w, "slic0_segments: k out of range");
    check(config.spacing >= 1, "slic0_segments: spacing must be >= 1");
    const int k = config.k;
    const double S = config.spacing;

    // Regular grid initialization sized to yield k centers.
    int gy = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(k) * h / w))));
    int gx = (k + gy - 1) / gy;
    while (gy * gx < k) ++gx;
    std::vector<Cluster> clusters;
    clusters.reserve(k);
    for (int iy = 0; iy < gy && static_cast<int>(clusters.size()) < k; ++iy)
        for (int ix = 0; ix < gx && static_cast<int>(clusters.size()) < k; ++ix) {
            Cluster c;
            c.y = (iy + 0.5) * h / gy;
            c.x = (ix + 0.5) * w / gx;
            clusters.push_back(c);
        }

    // Perturb each center to the lowest-gradient pixel in its 3x3 neighborhood.
    auto gradient = [&](int y, int x) {
        const int yp = std::min(y + 1, h - 1), ym = std::max(y - 1, 0);
        const int xp = std::min(x + 1, w - 1), xm = std::max(x - 1, 0);
        double g2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double dy = image.at(c, yp, x) - image.at(c, ym, x);
            const double dx = image.at(c, y, xp) - image.at(c, y, xm);
            g2 += dy * dy + dx * dx;
        }
        return g2;
    };
    for (auto& c : clusters) {
        int cy = std::clamp(static_cast<int>(c.y), 0, h - 1);
        int cx = std::clamp(static_cast<int>(c.x), 0, w - 1);
        int by = cy, bx = cx;
        double bg = std::numeric_limits<double>::infinity();
        for (int y = std::max(0, cy - 1); y <= std::min(h - 1, cy + 1); ++y)
            for (int x = std::max(0, cx - 1); x <= std::min(w - 1, cx + 1); ++x)
                if (gradient(y, x) < bg) {
                    bg = gradient(y, x);
                    by = y;
                    bx = x;
                }
        c.y = by;
        c.x = bx;
        c.r = image.at(0, by, bx);
        c.g = image.at(1, by, bx);
        c.b = image.at(2, by, bx);
    }

    // Initial assignment: spatially nearest center, so pixels outside every
    // search window still carry a label.
    std::vector<int32_t> label(static_cast<size_t>(h) * w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double dy = y - clusters[j].y, dx = x - clusters[j].x;
                const double d = dy * dy + dx * dx;
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            label[static_cast<size_t>(y) * w + x] = best;
        }

    std::vector<double> best_dist(static_cast<size_t>(h) * w);
    std::vector<double> new_max_c2(k);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        std::fill(best_dist.begin(), best_dist.end(),
                  std::numeric_limits<double>::infinity());
        // Assignment, restricted to a 2S window centred on each cluster.
        for (int j = 0; j < k; ++j) {
            const Cluster& c = clusters[j];
            const int y0 = std::max(0, static_cast<int>(std::floor(c.y - S)));
            const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + S)));
            const int x0 = std::max(0, static_cast<int>(std::floor(c.x - S)));
            const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + S)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dr = image.at(0, y, x) - c.r;
                    const double dg = image.at(1, y, x) - c.g;
                    const double db = image.at(2, y, x) - c.b;
                    const double dc2 = dr * dr + dg * dg + db * db;
                    const double dy = y - c.y, dx = x - c.x;
                    const double ds2 = dy * dy + dx * dx;
                    const double d = dc2 / c.max_c2 + ds2 / (S * S);
                    const size_t idx = static_cast<size_t>(y) * w + x;
                    if (d < best_dist[idx]) {
                        best_dist[idx] = d;
                        label[idx] = j;
                    }
                }
        }
        // Update means and the per-cluster adaptive normalizer.
        std::vector<double> sy(k, 0), sx(k, 0), sr(k, 0), sg(k, 0), sb(k, 0);
        std::vector<int> cnt(k, 0);
        std::fill(new_max_c2.begin(), new_max_c2.end(), 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int j = label[static_cast<size_t>(y) * w + x];
                sy[j] += y;
                sx[j] += x;
                sr[j] += image.at(0, y, x);
                sg[j] += image.at(1, y, x);
                sb[j] += image.at(2, y, x);
                ++cnt[j];
                const double dr = image.at(0, y, x) - clusters[j].r;
                const double dg = image.at(1, y, x) - clusters[j].g;
                const double db = image.at(2, y, x) - clusters[j].b;
                new_max_c2[j] = std::max(new_max_c2[j], dr * dr + dg * dg + db * db);
            }
        double displacement = 0.0;
        for (int j = 0; j < k; ++j) {
            if (cnt[j] == 0) continue;
            const double ny = sy[j] / cnt[j], nx = sx[j] / cnt[j];
            displacement += std::hypot(ny - clusters[j].y, nx - clusters[j].x);
            clusters[j].y = ny;
            clusters[j].x = nx;
            clusters[j].r = sr[j] / cnt[j];
            clusters[j].g = sg[j] / cnt[j];
            clusters[j].b = sb[j] / cnt[j];
            clusters[j].max_c2 = std::max(clusters[j].max_c2, new_max_c2[j]);
        }
        if (displacement / (k * S) < config.convergence_threshold) break;
    }

    // Connectivity post-pass: per label, keep the largest connected
    // component; other components smaller than S^2/4 are merged into the
    // neighboring segment sharing the longest border, larger ones get fresh
    // labels.
    std::vector<int32_t> comp(static_cast<size_t>(h) * w, -1);
    struct Component {
        int32_t lab;
        std::vector<int> pixels;
    };
    std::vector<Component> comps;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int idx = y * w + x;
            if (comp[idx] >= 0) continue;
            const int32_t lab = label[idx];
            Component cc;
            cc.lab = lab;
            std::queue<int> q;
            q.push(idx);
            comp[idx] = static_cast<int32_t>(comps.size());
            while (!q.empty()) {
                const int p = q.front();
                q.pop();
                cc.pixels.push_back(p);
                const int py = p / w, px = p % w;
                const int ns[4][2] = {{py - 1, px}, {py + 1, px}, {py, px - 1}, {py, px + 1}};
                for (auto& n : ns) {
                    if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
                    const int ni = n[0] * w + n[1];
                    if (comp[ni] < 0 && label[ni] == lab) {
                        comp[ni] = static_cast<int32_t>(comps.size());
                        q.push(ni);
                    }
                }
            }
            comps.push_back(std::move(cc));
        }
    // Largest component per label is canonical.
    std::map<int32_t, int> canonical;
    for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci) {
        auto it = canonical.find(comps[ci].lab);
        if (it == canonical.end() ||
            comps[ci].pixels.size() > comps[it->second].pixels.size())
            canonical[comps[ci].lab] = ci;
    }
    const int min_size = std::max(1, static_cast<int>(S * S / 4.0));
    int32_t next_label = k;
    for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci) {
        const Component& cc = comps[ci];
        if (canonical[cc.lab] == ci) continue;
        if (static_cast<int>(cc.pixels.size()) >= min_size) {
            const int32_t nl = next_label++;
            for (int p : cc.pixels) label[p] = nl;
            continue;
        }
        // Border-length vote among neighboring components.
        std::map<int32_t, int> border;
        for (int p : cc.pixels) {
            const int py = p / w, px = p % w;
            const int ns[4][2] = {{py - 1, px}, {py + 1, px}, {py, px - 1}, {py, px + 1}};
            for (auto& n : ns) {
                if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
                const int ni = n[0] * w + n[1];
                if (comp[ni] != ci) ++border[label[ni]];
            }
        }
        int32_t target = cc.lab;
        int best = -1;
        for (auto& [lab, len] : border)
            if (lab != cc.lab && (len > best || (len == best && lab < target))) {
                best = len;
                target = lab;
            }
        for (int p : cc.pixels) label[p] = target;
    }

    SegmentMask mask;
    mask.height = h;
    mask.width = w;
    mask.labels = std::move(label);
    relabel_contiguous(mask);
    return mask;
}

void write_segment_mask(const SegmentMask& mask, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    const int32_t hdr[2] = {mask.height, mask.width};
    f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    f.write(reinterpret_cast<const char*>(mask.labels.data()),
            sizeof(int32_t) * mask.labels.size());
}

SegmentMask read_segment_mask(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    int32_t hdr[2];
    f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    SegmentMask mask;
    mask.height = hdr[0];
    mask.width = hdr[1];
    mask.labels.resize(static_cast<size_t>(mask.height) * mask.width);
    f.read(reinterpret_cast<char*>(mask.labels.data()),
           sizeof(int32_t) * mask.labels.size());
    check(f.good(), "truncated segment mask file " + path);
    int32_t mx = -1;
    for (auto l : mask.labels) mx = std::max(mx, l);
    mask.n_segments = mx + 1;
    return mask;
}

}  // namespace spt
