#ifndef SNIS_BENCHMARK_HPP
#define SNIS_BENCHMARK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "snis/cluster.hpp"
#include "snis/dataset.hpp"
#include "snis/degradation.hpp"

namespace snis {

// Degraded/clean patch pairs with known ground truth, the benchmark input.
// SNPP: magic "SNPP", u32 version=1, u32 n, u64 count, f64 peak, then
// count records of 2n f32 values (degraded row, clean row).
struct PatchPairSet {
    std::uint32_t n = 0;
    std::uint64_t count = 0;
    double peak = 255.0;
    std::vector<float> degraded;  // count*n
    std::vector<float> clean;     // count*n

    int side() const;
    void validate() const;
};

PatchPairSet load_patch_pairs(const std::string& path);
void save_patch_pairs(const PatchPairSet& pairs, const std::string& path);

struct BenchmarkRow {
    std::size_t budget;      // processed dataset patches per estimated pixel
    std::string method;      // snis | uniform | exact
    double psnr_db;
    double wall_seconds;
};

struct BenchmarkOptions {
    std::vector<std::size_t> budgets;   // strictly increasing
    std::vector<std::string> methods;
    double alpha_fraction = 0.6;        // share of each stage spent on the mixture weights
    std::uint64_t seed = 0;
    int seed_count = 1;                 // PSNR averaged over this many seeds
    int threads = 0;
};

// Estimates the central pixel of every test patch under each method and
// budget. snis runs one alternating stage per budget increment, splitting
// the increment alpha_fraction/rest between the two stages and carrying the
// estimate across stages; uniform accumulates draws across budgets; exact
// ignores budgets and reports a single exhaustive row.
std::vector<BenchmarkRow> run_benchmark(const PatchPairSet& pairs, const PatchDataset& ds,
                                        const ClusterModel& cm, const DegradationModel& model,
                                        const BenchmarkOptions& opts);

// Header "budget,method,psnr_db,wall_seconds" plus one row per entry.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace snis

#endif
