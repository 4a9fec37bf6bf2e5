#ifndef SNIS_CLUSTER_HPP
#define SNIS_CLUSTER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "snis/dataset.hpp"
#include "snis/rng.hpp"

namespace snis {

enum class ClusterAlgo { KMeans, Cem };

// Hard partition of a PatchDataset. `mass[k]` is the empirical prior mass of
// cluster k, |members[k]| / count; every cluster is non-empty by construction
// (an empty cluster is reseeded from the largest one). Centroids are kept for
// assignment and diagnostics only.
struct ClusterModel {
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    std::uint64_t count = 0;
    std::vector<std::uint32_t> assignment;            // per patch, in [0, k)
    std::vector<std::vector<std::uint32_t>> members;  // per cluster, ascending
    std::vector<double> mass;                         // per cluster
    std::vector<double> centroids;                    // k*n

    void validate() const;
};

ClusterModel cluster_kmeans(const PatchDataset& ds, std::uint32_t k, std::uint64_t seed,
                            int max_iter = 50, int threads = 0);

// Classification-EM with diagonal Gaussian components; hard assignment by
// maximum component posterior each iteration. Variances are floored at
// 1e-6 times the overall data variance so degenerate clusters cannot
// produce NaNs. Same output contract as cluster_kmeans.
ClusterModel cluster_cem(const PatchDataset& ds, std::uint32_t k, std::uint64_t seed,
                         int max_iter = 50, int threads = 0);

// SNCM: magic "SNCM", u32 version=1, u32 K, u32 n, u64 count,
// count u32 assignment, K f64 masses, K*n f32 centroids.
ClusterModel load_clusters(const std::string& path);
void save_clusters(const ClusterModel& cm, const std::string& path);

// Uniform draws with replacement over members[k].
std::vector<std::uint64_t> sample_cluster(const ClusterModel& cm, std::uint32_t k,
                                          std::size_t count, Rng& rng);

}  // namespace snis

#endif
