#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastkan/network.hpp"

namespace fastkan {

enum class BenchMode { Forward, ForwardBackward };

const char* bench_mode_name(BenchMode mode);

// Timing protocol: per (family, mode), warm up, then time `repeats` calls per
// round with a monotonic clock, for `rounds` rounds. Mean and std are taken
// across the round means. The layer under test is a bare KAN layer (no layer
// normalization), 100->100 with 8 bases by default.
struct BenchConfig {
    int in_dim = 100;
    int out_dim = 100;
    int basis_count = 8;
    int batch = 1;
    int rounds = 10;
    int repeats = 1000;
    int warmup = 100;
    bool run_forward = true;
    bool run_forward_backward = true;
    BasisKind baseline = BasisKind::BSpline;
    BasisKind candidate = BasisKind::GaussianRbf;

    void validate() const;
};

struct BenchEntry {
    std::string implementation;  // row label
    BasisKind family;
    BenchMode mode;
    double mean_us = 0.0;  // per single call
    double std_us = 0.0;   // across round means
    double checksum = 0.0; // output-derived; equal across runs with one seed
};

struct BenchReport {
    BenchConfig config;
    std::uint64_t seed = 0;
    std::vector<BenchEntry> entries;
    // baseline mean / candidate mean, per mode; 0 when the mode did not run.
    double speedup_forward = 0.0;
    double speedup_forward_backward = 0.0;
    bool resolution_warning = false;

    const BenchEntry* find(bool candidate_slot, BenchMode mode) const;
};

BenchReport run_bench(const BenchConfig& cfg, std::uint64_t seed);

// CSV plus a human-readable table with the columns implementation,
// fwd (us), fwd acc., fwd+bwd (us), fwd+bwd acc.
void emit_bench(const BenchReport& report, const std::string& csv_path,
                const std::string& table_path);

std::string bench_table(const BenchReport& report);

} // namespace fastkan
