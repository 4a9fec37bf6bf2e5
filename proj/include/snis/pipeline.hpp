#ifndef SNIS_PIPELINE_HPP
#define SNIS_PIPELINE_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "snis/cluster.hpp"
#include "snis/config.hpp"
#include "snis/dataset.hpp"
#include "snis/degradation.hpp"
#include "snis/estimator.hpp"
#include "snis/image.hpp"
#include "snis/rng.hpp"

namespace snis {

// Retry cap for the per-patch sigma escalation in inpainting.
inline constexpr int kMaxSigmaEscalations = 20;

struct RestorationReport {
    double psnr_db = std::numeric_limits<double>::quiet_NaN();  // set when a reference is known
    std::size_t patches_processed = 0;
    std::size_t likelihood_evaluations = 0;
    double wall_seconds = 0.0;
    std::vector<double> alpha_entropy;   // mean over patches, one entry per iteration
    std::size_t sigma_escalations = 0;   // total retries across patches

    std::string to_kv() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

// Applies the forward model: Gaussian adds N(0, sigma^2); Poisson rescales
// the clean image to [0, peak] and draws counts; masked variants zero the
// missing pixels after the noise.
Image degrade(const Image& image, const DegradationModel& model, Rng& rng);

// Restores one patch, growing sigma geometrically on AllWeightsZero. Only
// MaskedGaussian models escalate; sigma starts from the model's sigma when
// positive, else from cfg.sigma_init (noiseless inpainting). The escalation
// count is added to *escalations.
PatchRestoreResult restore_patch_escalating(const Patch& y, const PatchDataset& ds,
                                            const ClusterModel& cm, const DegradationModel& model,
                                            const RestorationConfig& cfg, Rng& rng,
                                            std::size_t* escalations);

// Patch-wise restoration of a whole image. WholePatch mode extracts at
// cfg.stride (boundary-clamped) and averages overlapping estimates;
// CentralPixel mode mirror-pads the image and restores one pixel per
// position. Deterministic for fixed (seed, inputs) independent of threads.
std::pair<Image, RestorationReport> restore_image(const Image& observed,
                                                  const DegradationModel& model,
                                                  const PatchDataset& ds, const ClusterModel& cm,
                                                  const RestorationConfig& cfg, int threads = 0);

// 10 log10(peak^2 / MSE); +inf when the images are identical.
double psnr(const Image& reference, const Image& estimate, double peak);

}  // namespace snis

#endif
