#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "spt/data.hpp"

using namespace spt;

namespace {

const char* data_root() {
    const char* env = std::getenv("SPT_DATA_ROOT");
    return env ? env : "/root/data";
}

bool have_fashionmnist() {
    return std::filesystem::exists(std::string(data_root()) +
                                   "/fashion_mnist/train-images-idx3-ubyte");
}

void write_be32(std::ofstream& f, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                          static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

void write_idx_pair(const std::string& img_path, const std::string& lbl_path,
                    int n, int h, int w, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::ofstream fi(img_path, std::ios::binary);
    write_be32(fi, 0x803);
    write_be32(fi, n);
    write_be32(fi, h);
    write_be32(fi, w);
    for (int i = 0; i < n * h * w; ++i) {
        const uint8_t b = static_cast<uint8_t>(rng() % 256);
        fi.write(reinterpret_cast<const char*>(&b), 1);
    }
    std::ofstream fl(lbl_path, std::ios::binary);
    write_be32(fl, 0x801);
    write_be32(fl, n);
    for (int i = 0; i < n; ++i) {
        const uint8_t b = static_cast<uint8_t>(i % 10);
        fl.write(reinterpret_cast<const char*>(&b), 1);
    }
}

}  // namespace

TEST_CASE("dataset specs match the published geometry and splits") {
    const DatasetSpec fm = fashionmnist_spec();
    CHECK(fm.channels == 1);
    CHECK(fm.height == 28);
    CHECK(fm.width == 28);
    CHECK(fm.spacing == 4);
    CHECK(fm.n_train == 54000);
    CHECK(fm.n_valid == 6000);
    CHECK(fm.n_test == 10000);
    CHECK(fm.dev_total() == 60000);

    const DatasetSpec c10 = cifar10_spec();
    CHECK(c10.channels == 3);
    CHECK(c10.height == 32);
    CHECK(c10.n_train == 47500);
    CHECK(c10.n_valid == 2500);
    CHECK(c10.dev_total() == 50000);

    CHECK_THROWS(dataset_spec_by_name("imagenette"));
}

TEST_CASE("synthetic idx files parse and byte 255 maps to exactly 1.0") {
    write_idx_pair("toy-images", "toy-labels", 3, 4, 4, 1);
    RawDataset ds = load_idx("toy-images", "toy-labels");
    CHECK(ds.size() == 3);
    CHECK(ds.height == 4);
    CHECK(ds.width == 4);
    ds.images[0][5] = 255;
    ds.images[0][6] = 0;
    const Image img = ds.get_image(0);
    CHECK(img.at(0, 1, 1) == 1.0);
    CHECK(img.at(0, 1, 2) == 0.0);
    // grayscale replicated to three identical channels
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            CHECK(img.at(0, y, x) == img.at(1, y, x));
            CHECK(img.at(1, y, x) == img.at(2, y, x));
        }
    std::remove("toy-images");
    std::remove("toy-labels");
}

TEST_CASE("image magic on a label file is a bad-magic error") {
    write_idx_pair("toy-images2", "toy-labels2", 2, 3, 3, 2);
    CHECK_THROWS(load_idx_labels("toy-images2"));
    CHECK_THROWS(load_idx_images("toy-labels2", nullptr, nullptr));
    CHECK_THROWS(load_idx("missing-file", "toy-labels2"));
    std::remove("toy-images2");
    std::remove("toy-labels2");
}

TEST_CASE("image/label count mismatch is rejected") {
    write_idx_pair("toy-images3", "toy-labels3", 2, 3, 3, 3);
    write_idx_pair("toy-images4", "toy-labels4", 5, 3, 3, 4);
    CHECK_THROWS(load_idx("toy-images3", "toy-labels4"));
    for (const char* p : {"toy-images3", "toy-labels3", "toy-images4", "toy-labels4"})
        std::remove(p);
}

TEST_CASE("cifar batches round-trip through the 3073-byte record format") {
    namespace fsys = std::filesystem;
    fsys::create_directories("toy_cifar");
    std::mt19937_64 rng(5);
    std::vector<uint8_t> original;
    {
        std::ofstream f("toy_cifar/test_batch.bin", std::ios::binary);
        for (int r = 0; r < 4; ++r) {
            original.push_back(static_cast<uint8_t>(r % 10));
            for (int i = 0; i < 3072; ++i)
                original.push_back(static_cast<uint8_t>(rng() % 256));
        }
        f.write(reinterpret_cast<const char*>(original.data()), original.size());
    }
    const RawDataset ds = load_cifar10("toy_cifar", false);
    CHECK(ds.size() == 4);
    CHECK(ds.height == 32);
    // re-serialize and compare with the source bytes
    std::vector<uint8_t> rebuilt;
    for (size_t r = 0; r < ds.size(); ++r) {
        rebuilt.push_back(ds.labels[r]);
        rebuilt.insert(rebuilt.end(), ds.images[r].begin(), ds.images[r].end());
    }
    CHECK(rebuilt == original);
    fsys::remove_all("toy_cifar");
}

TEST_CASE("cifar loader rejects bad labels and truncated records") {
    namespace fsys = std::filesystem;
    fsys::create_directories("toy_cifar2");
    {
        std::ofstream f("toy_cifar2/test_batch.bin", std::ios::binary);
        std::vector<uint8_t> rec(3073, 0);
        rec[0] = 11;  // label out of range
        f.write(reinterpret_cast<const char*>(rec.data()), rec.size());
    }
    CHECK_THROWS(load_cifar10("toy_cifar2", false));
    {
        std::ofstream f("toy_cifar2/test_batch.bin", std::ios::binary);
        std::vector<uint8_t> rec(3000, 0);  // not a whole record
        f.write(reinterpret_cast<const char*>(rec.data()), rec.size());
    }
    CHECK_THROWS(load_cifar10("toy_cifar2", false));
    fsys::remove_all("toy_cifar2");
}

TEST_CASE("dev split is disjoint, exhaustive and seed-deterministic") {
    auto [train, valid] = split_train_valid(60000, 54000, 0);
    CHECK(train.size() == 54000);
    CHECK(valid.size() == 6000);
    std::set<int> all(train.begin(), train.end());
    all.insert(valid.begin(), valid.end());
    CHECK(all.size() == 60000);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 59999);

    auto [train2, valid2] = split_train_valid(60000, 54000, 0);
    CHECK(train == train2);
    CHECK(valid == valid2);
    auto [train3, valid3] = split_train_valid(60000, 54000, 1);
    CHECK(train != train3);

    CHECK_THROWS(split_train_valid(10, 11, 0));
}

TEST_CASE("published fashionmnist files load with the expected shapes") {
    if (!have_fashionmnist()) {
        MESSAGE("dataset files not present; skipping");
        return;
    }
    const DatasetSpec spec = fashionmnist_spec();
    const RawDataset dev = load_dev_split(spec, data_root());
    CHECK(dev.size() == 60000);
    CHECK(dev.height == 28);
    CHECK(dev.width == 28);
    const RawDataset test = load_test_split(spec, data_root());
    CHECK(test.size() == 10000);
    // every pixel value lands in [0,1] after scaling
    const Image img = dev.get_image(0);
    for (double v : img.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
