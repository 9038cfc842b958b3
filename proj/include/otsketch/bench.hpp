#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otsketch/descent.hpp"
#include "otsketch/grid_density.hpp"

namespace otsketch {

enum class BenchDensity { uniform, half_split };

// rho = 2 on x < 1/2, 0 on x >= 1/2, sampled on a 64-cell grid (the node at
// x = 1/2 holds 0, so one cell ramps down) and normalized.
GridDensity half_split_density();

struct BenchConfig {
    BenchDensity density = BenchDensity::uniform;
    std::vector<int> sizes;         // site counts, e.g. 1<<10, 1<<12
    std::uint64_t seed = 1;
    double snr_threshold_db = 31.0;
    int snr_grid = 256;             // pixel grid for the SNR meter
    int max_outer = 400;            // "NC" past this
    double time_limit_s = 0.0;      // 0 disables; "TL" past this
    NewtonMode newton = NewtonMode::regularized;
    Exec exec = Exec::parallel;
};

struct BenchRow {
    std::string density;
    int n = 0;
    int iterations = 0;
    double seconds = 0.0;
    double snr_db = 0.0;
    std::string status; // OK | TL | NC
};

std::vector<BenchRow> run_bench(const BenchConfig& cfg);

// CSV with header density,n,iterations,seconds,snr_db,status
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

} // namespace otsketch
