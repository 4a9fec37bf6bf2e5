#ifndef SNIS_ESTIMATOR_HPP
#define SNIS_ESTIMATOR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "snis/cluster.hpp"
#include "snis/config.hpp"
#include "snis/dataset.hpp"
#include "snis/degradation.hpp"
#include "snis/image.hpp"
#include "snis/likelihood.hpp"
#include "snis/rng.hpp"

namespace snis {

// Point on the (K-1)-simplex; the proposal mixture weights fitted to one
// degraded patch.
struct ProposalWeights {
    std::vector<double> alpha;

    void validate() const;
    // Shannon entropy -sum alpha ln alpha; 0 for a point mass.
    double entropy() const;
};

// A dataset row drawn during sampling, tagged with its cluster.
struct DrawnSample {
    std::uint64_t patch_index;
    std::uint32_t cluster_id;
};

// A proposal draw with its self-normalized importance log-weight.
// log_weight may be -inf (impossible sample) but never NaN.
struct WeightedSample {
    std::uint64_t patch_index;
    std::uint32_t cluster_id;
    double log_weight;
};

// Ratio of the observation's intensity scale to the dataset's: Poisson
// models evaluate candidates as clean_scale * x, Gaussian models share the
// dataset scale and get 1.
double clean_scale_for(const DegradationModel& model, const PatchDataset& ds);

// Per-cluster proposal scores from uniformly drawn samples. The likelihood
// factor is computed once per sample and exponentiated after a shared max
// subtraction, which rescales every b_k by the same positive factor and
// leaves the optimal mixture weights unchanged. `estimate` holds the current
// running estimate: 1 value in CentralPixel mode, n values in WholePatch
// mode. Clusters with no samples score 0.
std::vector<double> compute_bk(const std::vector<DrawnSample>& samples, const PatchDataset& ds,
                               std::span<const double> estimate, const Patch& y,
                               const DegradationModel& model, const ClusterModel& cm,
                               EstimationMode mode, double clean_scale = 1.0);

// alpha_k = b_k^2 / sum b^2; all-zero scores fall back to uniform weights.
ProposalWeights optimize_alpha(std::span<const double> b);

// Largest-remainder apportionment of `total` draws by quotas alpha_k*total;
// ties go to the lower cluster index, and the counts always sum to total.
std::vector<std::size_t> allocate_samples(const ProposalWeights& weights, std::size_t total);

// log m_k + log_lik - log alpha_k for a sample drawn from cluster `cluster`.
double snis_log_weight(std::uint32_t cluster, double log_lik, const ClusterModel& cm,
                       const ProposalWeights& weights);

// Self-normalized weighted averages over the sampled patches, exp-normalized
// with max subtraction. Samples at -inf are excluded; if none remain,
// AllWeightsZero is thrown.
double weighted_average_central(const std::vector<WeightedSample>& samples,
                                const PatchDataset& ds, double clean_scale = 1.0);
Patch weighted_average_patch(const std::vector<WeightedSample>& samples, const PatchDataset& ds,
                             double clean_scale = 1.0);

struct PatchRestoreResult {
    std::vector<double> estimate;       // 1 value (CentralPixel) or n (WholePatch)
    std::vector<double> alpha_entropy;  // per iteration
    std::size_t likelihood_evals = 0;
};

// The alternating restoration of one degraded patch: per iteration, draw
// uniform samples to score the clusters and fit alpha, then draw from the
// fitted mixture and update the estimate by the self-normalized average.
// `exhaustive` replaces both stages' draws with a full enumeration of the
// dataset (test mode; with one cluster this reproduces exact_mmse).
// AllWeightsZero escapes with the failing iteration's alpha attached.
PatchRestoreResult restore_patch(const Patch& y, const PatchDataset& ds, const ClusterModel& cm,
                                 const DegradationModel& model, const RestorationConfig& cfg,
                                 Rng& rng, bool exhaustive = false);

struct MmseEstimate {
    Patch patch;
    double central;
};

// Likelihood-weighted average over the entire dataset; the verification
// oracle for every sampled estimator.
MmseEstimate exact_mmse(const Patch& y, const PatchDataset& ds, const DegradationModel& model);

// Plain uniform sampling with likelihood weights (no clustering); the
// benchmark baseline. `exhaustive` enumerates the dataset instead.
MmseEstimate uniform_baseline(const Patch& y, const PatchDataset& ds,
                              const DegradationModel& model, std::size_t samples, Rng& rng,
                              bool exhaustive = false);

}  // namespace snis

#endif
