#include "fastkan/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "fastkan/errors.hpp"
#include "fastkan/rng.hpp"

namespace fastkan {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

std::vector<std::uint8_t> read_all_bytes(const std::string& path) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw DataError("cannot open " + path);
        std::vector<std::uint8_t> out;
        std::uint8_t buf[1 << 16];
        int n = 0;
        while ((n = gzread(f, buf, sizeof(buf))) > 0)
            out.insert(out.end(), buf, buf + n);
        const bool bad = n < 0;
        gzclose(f);
        if (bad) throw FormatError("gzip decompression failed for " + path);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw IoError("cannot create " + path);
        const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
        gzclose(f);
        if (n != static_cast<int>(bytes.size()))
            throw IoError("short gzip write to " + path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void append_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 24));
    b.push_back(static_cast<std::uint8_t>(v >> 16));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}

} // namespace

Matrix load_idx_images(const std::string& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() < 16) throw FormatError(path + ": truncated IDX header");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kImagesMagic)
        throw FormatError(path + ": bad image magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%08x", magic);
            return std::string(buf);
        }());
    const std::uint32_t n = read_be32(bytes, 4);
    const std::uint32_t rows = read_be32(bytes, 8);
    const std::uint32_t cols = read_be32(bytes, 12);
    const std::size_t expected = std::size_t(n) * rows * cols;
    const std::size_t actual = bytes.size() - 16;
    if (actual != expected)
        throw FormatError(path + ": payload has " + std::to_string(actual) +
                          " bytes, header promises " + std::to_string(expected));
    if (n == 0 || rows == 0 || cols == 0)
        throw FormatError(path + ": empty image file");
    Matrix m(static_cast<int>(n), static_cast<int>(rows * cols));
    for (std::size_t i = 0; i < expected; ++i)
        m.data()[i] = bytes[16 + i] / 255.0;
    return m;
}

std::vector<int> load_idx_labels(const std::string& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() < 8) throw FormatError(path + ": truncated IDX header");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kLabelsMagic)
        throw FormatError(path + ": bad label magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%08x", magic);
            return std::string(buf);
        }());
    const std::uint32_t n = read_be32(bytes, 4);
    if (bytes.size() - 8 != n)
        throw FormatError(path + ": payload has " + std::to_string(bytes.size() - 8) +
                          " bytes, header promises " + std::to_string(n));
    std::vector<int> labels(n);
    for (std::uint32_t i = 0; i < n; ++i) labels[i] = bytes[8 + i];
    return labels;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      int n, int rows, int cols) {
    if (pixels.size() != std::size_t(n) * rows * cols)
        throw ConfigError("write_idx_images: pixel count does not match dimensions");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + pixels.size());
    append_be32(bytes, kImagesMagic);
    append_be32(bytes, static_cast<std::uint32_t>(n));
    append_be32(bytes, static_cast<std::uint32_t>(rows));
    append_be32(bytes, static_cast<std::uint32_t>(cols));
    bytes.insert(bytes.end(), pixels.begin(), pixels.end());
    write_all_bytes(path, bytes);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + labels.size());
    append_be32(bytes, kLabelsMagic);
    append_be32(bytes, static_cast<std::uint32_t>(labels.size()));
    bytes.insert(bytes.end(), labels.begin(), labels.end());
    write_all_bytes(path, bytes);
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx) {
    Matrix inputs(static_cast<int>(idx.size()), ds.inputs.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = ds.inputs.row(idx[r]);
        std::copy(src.begin(), src.end(), inputs.row(static_cast<int>(r)).begin());
    }
    Dataset out{std::move(inputs), {}, std::nullopt, ds.kind, ds.num_classes};
    if (ds.kind == DatasetKind::Classification) {
        out.labels.resize(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            out.labels[r] = ds.labels[static_cast<std::size_t>(idx[r])];
    } else if (ds.targets) {
        Matrix t(static_cast<int>(idx.size()), ds.targets->cols());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const auto src = ds.targets->row(idx[r]);
            std::copy(src.begin(), src.end(), t.row(static_cast<int>(r)).begin());
        }
        out.targets = std::move(t);
    }
    return out;
}

} // namespace

Dataset subset(const Dataset& ds, int n, std::uint64_t seed) {
    if (n < 1 || n > ds.size())
        throw DataError("subset: requested " + std::to_string(n) + " of " +
                        std::to_string(ds.size()) + " rows");
    Rng rng(mix_seed(seed, 0xda7a));

    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(n));
    if (ds.kind == DatasetKind::Classification) {
        const int c = std::max(ds.num_classes, 1);
        std::vector<std::vector<int>> buckets(static_cast<std::size_t>(c));
        for (int i = 0; i < ds.size(); ++i)
            buckets[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);

        // Largest-remainder quotas: preserve class proportions, total exactly n.
        std::vector<int> quota(buckets.size(), 0);
        std::vector<std::pair<double, std::size_t>> remainders;
        int assigned = 0;
        for (std::size_t k = 0; k < buckets.size(); ++k) {
            const double exact = static_cast<double>(n) * buckets[k].size() / ds.size();
            quota[k] = static_cast<int>(exact);
            assigned += quota[k];
            remainders.push_back({exact - quota[k], k});
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t i = 0; assigned < n; ++i, ++assigned)
            quota[remainders[i % remainders.size()].second] += 1;

        for (std::size_t k = 0; k < buckets.size(); ++k) {
            quota[k] = std::min(quota[k], static_cast<int>(buckets[k].size()));
            rng.shuffle(buckets[k]);
            chosen.insert(chosen.end(), buckets[k].begin(), buckets[k].begin() + quota[k]);
        }
        // Quotas can undershoot when a class runs dry; top up from the rest.
        if (static_cast<int>(chosen.size()) < n) {
            std::vector<char> used(static_cast<std::size_t>(ds.size()), 0);
            for (int i : chosen) used[static_cast<std::size_t>(i)] = 1;
            std::vector<int> rest;
            for (int i = 0; i < ds.size(); ++i)
                if (!used[static_cast<std::size_t>(i)]) rest.push_back(i);
            rng.shuffle(rest);
            for (std::size_t i = 0; static_cast<int>(chosen.size()) < n; ++i)
                chosen.push_back(rest[i]);
        }
    } else {
        std::vector<int> all(static_cast<std::size_t>(ds.size()));
        for (int i = 0; i < ds.size(); ++i) all[static_cast<std::size_t>(i)] = i;
        rng.shuffle(all);
        chosen.assign(all.begin(), all.begin() + n);
    }
    rng.shuffle(chosen);
    return take_rows(ds, chosen);
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, int val_n,
                                            std::uint64_t seed) {
    if (val_n < 1 || val_n >= ds.size())
        throw DataError("split: validation size " + std::to_string(val_n) +
                        " must be in [1, " + std::to_string(ds.size()) + ")");
    Rng rng(mix_seed(seed, 0x5b117));
    std::vector<int> order = rng.permutation(ds.size());
    const std::vector<int> train_idx(order.begin(), order.end() - val_n);
    const std::vector<int> val_idx(order.end() - val_n, order.end());
    return {take_rows(ds, train_idx), take_rows(ds, val_idx)};
}

Dataset synth_regression(const std::string& name, int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("synth_regression: n must be >= 1");
    int d = 0;
    if (name == "sine") {
        d = 1;
    } else if (name == "gaussian_bump" || name == "product") {
        d = 2;
    } else {
        throw ConfigError("synth_regression: unknown dataset '" + name +
                          "' (expected sine, gaussian_bump or product)");
    }
    Rng rng(mix_seed(seed, 0x5e17));
    Matrix x(n, d);
    Matrix y(n, 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
        if (name == "sine") {
            y(i, 0) = std::sin(3.14159265358979323846 * x(i, 0));
        } else if (name == "gaussian_bump") {
            y(i, 0) = std::exp(-4.0 * (x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1)));
        } else {
            y(i, 0) = x(i, 0) * x(i, 1);
        }
    }
    return {std::move(x), {}, std::move(y), DatasetKind::Regression, 0};
}

Dataset make_xor() {
    Matrix x = Matrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    return {std::move(x), {0, 1, 1, 0}, std::nullopt, DatasetKind::Classification, 2};
}

namespace {

std::string find_variant(const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    const fs::path plain = fs::path(dir) / name;
    if (fs::exists(plain)) return plain.string();
    const fs::path gz = fs::path(dir) / (name + ".gz");
    if (fs::exists(gz)) return gz.string();
    return {};
}

} // namespace

MnistFiles locate_mnist(const std::string& dir) {
    MnistFiles f;
    f.train_images = find_variant(dir, "train-images-idx3-ubyte");
    f.train_labels = find_variant(dir, "train-labels-idx1-ubyte");
    f.test_images = find_variant(dir, "t10k-images-idx3-ubyte");
    f.test_labels = find_variant(dir, "t10k-labels-idx1-ubyte");
    if (f.train_images.empty() || f.train_labels.empty())
        throw DataError(
            "MNIST files not found in '" + dir +
            "'. Expected train-images-idx3-ubyte and train-labels-idx1-ubyte "
            "(t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte optional), each "
            "optionally gzip-compressed with a .gz suffix.");
    return f;
}

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
    Matrix inputs = load_idx_images(images_path);
    std::vector<int> labels = load_idx_labels(labels_path);
    if (static_cast<int>(labels.size()) != inputs.rows())
        throw DataError(images_path + " has " + std::to_string(inputs.rows()) +
                        " images but " + labels_path + " has " +
                        std::to_string(labels.size()) + " labels");
    const int num_classes = 1 + *std::max_element(labels.begin(), labels.end());
    return {std::move(inputs), std::move(labels), std::nullopt,
            DatasetKind::Classification, num_classes};
}

} // namespace fastkan
