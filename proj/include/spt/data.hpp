#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spt/image.hpp"

namespace spt {

struct DatasetSpec {
    std::string name;
    int channels = 0, height = 0, width = 0;
    int n_classes = 10;
    int spacing = 4;  // S
    int n_train = 0, n_valid = 0, n_test = 0;

    int dev_total() const { return n_train + n_valid; }
};

DatasetSpec fashionmnist_spec();
DatasetSpec cifar10_spec();
DatasetSpec dataset_spec_by_name(const std::string& name);

// Raw images as loaded from disk; pixel bytes are kept verbatim and scaled
// to [0,1] (with grayscale replicated to 3 channels) when materialized.
struct RawDataset {
    int channels = 0, height = 0, width = 0;
    std::vector<std::vector<uint8_t>> images;  // channel-major bytes
    std::vector<uint8_t> labels;

    size_t size() const { return images.size(); }
    Image get_image(size_t i) const {
        return Image::from_bytes(images[i].data(), channels, height, width);
    }
};

// IDX containers (big-endian header; magic 0x803 for images, 0x801 for labels).
std::vector<std::vector<uint8_t>> load_idx_images(const std::string& path,
                                                  int* height, int* width);
std::vector<uint8_t> load_idx_labels(const std::string& path);
RawDataset load_idx(const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batches: 3073-byte records (label byte + 3072 channel-major
// pixel bytes). train=true reads data_batch_{1..5}.bin, else test_batch.bin.
RawDataset load_cifar10(const std::string& dir, bool train);

// Loads the development split of a dataset given its root directory.
RawDataset load_dev_split(const DatasetSpec& spec, const std::string& data_root);
RawDataset load_test_split(const DatasetSpec& spec, const std::string& data_root);

// Deterministic disjoint and exhaustive split of [0, n_dev) into train and
// validation index sets.
std::pair<std::vector<int>, std::vector<int>> split_train_valid(
    int n_dev, int n_train, unsigned long long seed);

}  // namespace spt
