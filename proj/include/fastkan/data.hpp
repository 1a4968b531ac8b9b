#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastkan/matrix.hpp"

namespace fastkan {

enum class DatasetKind { Classification, Regression };

struct Dataset {
    Matrix inputs;                   // n x d
    std::vector<int> labels;         // classification: size n, values < num_classes
    std::optional<Matrix> targets;   // regression: n x t
    DatasetKind kind = DatasetKind::Classification;
    int num_classes = 0;

    int size() const { return inputs.rows(); }
    int dim() const { return inputs.cols(); }
};

// IDX readers. Big-endian magic (0x00000803 images, 0x00000801 labels),
// big-endian dimension sizes, unsigned-byte payload. Pixels are scaled to
// [0, 1] by /255. A path ending in ".gz" is decompressed transparently.
Matrix load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

// IDX writers (fixtures and round-trip tests). Same ".gz" convention.
void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      int n, int rows, int cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// Seeded class-stratified sample of n rows (largest-remainder per-class
// quotas, preserving class proportions). Regression datasets fall back to a
// plain seeded sample without replacement.
Dataset subset(const Dataset& ds, int n, std::uint64_t seed);

// Seeded shuffle, then the last val_n rows become the validation set.
std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, int val_n,
                                            std::uint64_t seed);

// Smoke-test regression targets on seeded-uniform points in [-1, 1]^d:
//   sine:          d=1, y = sin(pi x)
//   gaussian_bump: d=2, y = exp(-4 (x^2 + y^2))
//   product:       d=2, y = x * y
Dataset synth_regression(const std::string& name, int n, std::uint64_t seed);

// The four XOR points with parity labels.
Dataset make_xor();

// Expected file names inside an MNIST directory (".gz" also accepted).
struct MnistFiles {
    std::string train_images;
    std::string train_labels;
    std::string test_images;  // empty when absent
    std::string test_labels;
};

// Locates the canonical files (train-images-idx3-ubyte, train-labels-idx1-ubyte,
// t10k-*) in dir. Throws DataError listing the expected names when the
// training pair is missing; the test pair is optional.
MnistFiles locate_mnist(const std::string& dir);

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path);

} // namespace fastkan
