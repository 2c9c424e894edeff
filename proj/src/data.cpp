#include "spt/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "spt/tensor.hpp"

namespace spt {

DatasetSpec fashionmnist_spec() {
    DatasetSpec s;
    s.name = "fashionmnist";
    s.channels = 1;
    s.height = 28;
    s.width = 28;
    s.n_classes = 10;
    s.spacing = 4;
    s.n_train = 54000;
    s.n_valid = 6000;
    s.n_test = 10000;
    return s;
}

DatasetSpec cifar10_spec() {
    DatasetSpec s;
    s.name = "cifar10";
    s.channels = 3;
    s.height = 32;
    s.width = 32;
    s.n_classes = 10;
    s.spacing = 4;
    s.n_train = 47500;
    s.n_valid = 2500;
    s.n_test = 10000;
    return s;
}

DatasetSpec dataset_spec_by_name(const std::string& name) {
    if (name == "fashionmnist") return fashionmnist_spec();
    if (name == "cifar10") return cifar10_spec();
    throw std::runtime_error("unknown dataset: " + name);
}

namespace {

uint32_t read_be32(std::istream& f, const std::string& path) {
    uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    check(f.good(), "truncated file: " + path);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) |
           uint32_t(b[3]);
}

}  // namespace

std::vector<std::vector<uint8_t>> load_idx_images(const std::string& path,
                                                  int* height, int* width) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    const uint32_t magic = read_be32(f, path);
    check(magic == 0x00000803u, "bad magic in " + path + " (expected image tensor)");
    const uint32_t count = read_be32(f, path);
    const uint32_t h = read_be32(f, path);
    const uint32_t w = read_be32(f, path);
    std::vector<std::vector<uint8_t>> images(count);
    for (auto& img : images) {
        img.resize(static_cast<size_t>(h) * w);
        f.read(reinterpret_cast<char*>(img.data()), img.size());
        check(f.good(), "truncated image data in " + path);
    }
    if (height) *height = static_cast<int>(h);
    if (width) *width = static_cast<int>(w);
    return images;
}

std::vector<uint8_t> load_idx_labels(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    const uint32_t magic = read_be32(f, path);
    check(magic == 0x00000801u, "bad magic in " + path + " (expected label vector)");
    const uint32_t count = read_be32(f, path);
    std::vector<uint8_t> labels(count);
    f.read(reinterpret_cast<char*>(labels.data()), labels.size());
    check(f.good(), "truncated label data in " + path);
    return labels;
}

RawDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    RawDataset ds;
    ds.channels = 1;
    ds.images = load_idx_images(images_path, &ds.height, &ds.width);
    ds.labels = load_idx_labels(labels_path);
    check(ds.images.size() == ds.labels.size(),
          "image/label count mismatch between " + images_path + " and " + labels_path);
    return ds;
}

RawDataset load_cifar10(const std::string& dir, bool train) {
    RawDataset ds;
    ds.channels = 3;
    ds.height = 32;
    ds.width = 32;
    std::vector<std::string> files;
    if (train)
        for (int b = 1; b <= 5; ++b)
            files.push_back(dir + "/data_batch_" + std::to_string(b) + ".bin");
    else
        files.push_back(dir + "/test_batch.bin");
    constexpr size_t kRecord = 3073;
    for (const auto& path : files) {
        std::ifstream f(path, std::ios::binary);
        check(f.good(), "cannot open " + path);
        f.seekg(0, std::ios::end);
        const auto bytes = static_cast<size_t>(f.tellg());
        check(bytes % kRecord == 0, "truncated record in " + path);
        f.seekg(0);
        const size_t n = bytes / kRecord;
        for (size_t i = 0; i < n; ++i) {
            uint8_t label;
            f.read(reinterpret_cast<char*>(&label), 1);
            check(label < 10, "label out of range in " + path);
            std::vector<uint8_t> img(3072);
            f.read(reinterpret_cast<char*>(img.data()), img.size());
            check(f.good(), "truncated record in " + path);
            ds.labels.push_back(label);
            ds.images.push_back(std::move(img));
        }
    }
    return ds;
}

RawDataset load_dev_split(const DatasetSpec& spec, const std::string& data_root) {
    if (spec.name == "fashionmnist")
        return load_idx(data_root + "/fashion_mnist/train-images-idx3-ubyte",
                        data_root + "/fashion_mnist/train-labels-idx1-ubyte");
    if (spec.name == "cifar10") return load_cifar10(data_root + "/cifar10", true);
    throw std::runtime_error("unknown dataset: " + spec.name);
}

RawDataset load_test_split(const DatasetSpec& spec, const std::string& data_root) {
    if (spec.name == "fashionmnist")
        return load_idx(data_root + "/fashion_mnist/t10k-images-idx3-ubyte",
                        data_root + "/fashion_mnist/t10k-labels-idx1-ubyte");
    if (spec.name == "cifar10") return load_cifar10(data_root + "/cifar10", false);
    throw std::runtime_error("unknown dataset: " + spec.name);
}

std::pair<std::vector<int>, std::vector<int>> split_train_valid(
    int n_dev, int n_train, unsigned long long seed) {
    check(n_train >= 0 && n_train <= n_dev, "split: size mismatch");
    std::vector<int> idx(n_dev);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> train(idx.begin(), idx.begin() + n_train);
    std::vector<int> valid(idx.begin() + n_train, idx.end());
    return {train, valid};
}

}  // namespace spt
