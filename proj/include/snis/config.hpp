#ifndef SNIS_CONFIG_HPP
#define SNIS_CONFIG_HPP

#include <cstdint>
#include <stdexcept>

namespace snis {

// CentralPixel restores one pixel per extracted patch (stride is forced to 1
// and the image is mirror-padded); WholePatch restores full patches and
// averages the overlaps back into the image.
enum class EstimationMode { CentralPixel, WholePatch };

struct RestorationConfig {
    int patch_side = 9;        // must be odd so a central pixel exists
    int stride = 2;
    int clusters = 20;         // partition size of the external dataset
    int alpha_samples = 900;   // uniform draws per iteration for the mixture weights
    int snis_samples = 300;    // proposal draws per iteration for the estimate
    int iterations = 3;        // alternating weight/estimate rounds
    EstimationMode mode = EstimationMode::WholePatch;
    std::uint64_t seed = 0;
    double sigma_init = 1.0;              // starting sigma for noiseless inpainting
    double sigma_escalation_factor = 2.0;

    void validate() const {
        if (patch_side <= 0 || patch_side % 2 == 0)
            throw std::invalid_argument("config: patch_side must be odd and positive");
        if (stride < 1)
            throw std::invalid_argument("config: stride must be >= 1");
        if (clusters < 1)
            throw std::invalid_argument("config: clusters must be >= 1");
        if (alpha_samples < clusters)
            throw std::invalid_argument("config: alpha_samples must be >= clusters");
        if (snis_samples < 1)
            throw std::invalid_argument("config: snis_samples must be >= 1");
        if (iterations < 1)
            throw std::invalid_argument("config: iterations must be >= 1");
        if (!(sigma_escalation_factor > 1.0))
            throw std::invalid_argument("config: sigma_escalation_factor must be > 1");
        if (!(sigma_init > 0.0))
            throw std::invalid_argument("config: sigma_init must be > 0");
    }
};

}  // namespace snis

#endif
