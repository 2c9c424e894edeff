#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace spt {

// 3-channel image with values in [0,1], channel-major (c,y,x) layout.
// Single-channel inputs are replicated to 3 channels at ingestion.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // size 3*height*width

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(static_cast<size_t>(3) * h * w, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }

    // Builds an image from raw bytes (values scaled by 1/255), replicating a
    // single channel to 3.
    static Image from_bytes(const uint8_t* bytes, int channels, int h, int w) {
        if (channels != 1 && channels != 3)
            throw std::runtime_error("image must have 1 or 3 channels");
        Image img(h, w);
        const size_t plane = static_cast<size_t>(h) * w;
        for (int c = 0; c < 3; ++c) {
            const uint8_t* src = bytes + (channels == 3 ? c * plane : 0);
            for (size_t i = 0; i < plane; ++i)
                img.data[c * plane + i] = src[i] / 255.0;
        }
        return img;
    }
};

}  // namespace spt
