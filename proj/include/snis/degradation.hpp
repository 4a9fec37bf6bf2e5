#ifndef SNIS_DEGRADATION_HPP
#define SNIS_DEGRADATION_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace snis {

enum class NoiseKind { Gaussian, Poisson, MaskedGaussian, MaskedPoisson };

// Tagged description of the forward model. `sigma` is the Gaussian std-dev,
// `peak` the Poisson mean scale. `mask` holds one entry per pixel of whatever
// the model is applied to (image or patch); 1 = observed, 0 = missing.
struct DegradationModel {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma = 0.0;
    double peak = 0.0;
    std::vector<std::uint8_t> mask;

    static DegradationModel gaussian(double sigma) {
        DegradationModel m;
        m.kind = NoiseKind::Gaussian;
        m.sigma = sigma;
        return m;
    }
    static DegradationModel poisson(double peak) {
        DegradationModel m;
        m.kind = NoiseKind::Poisson;
        m.peak = peak;
        return m;
    }
    static DegradationModel masked_gaussian(double sigma, std::vector<std::uint8_t> mask) {
        DegradationModel m;
        m.kind = NoiseKind::MaskedGaussian;
        m.sigma = sigma;
        m.mask = std::move(mask);
        return m;
    }
    static DegradationModel masked_poisson(double peak, std::vector<std::uint8_t> mask) {
        DegradationModel m;
        m.kind = NoiseKind::MaskedPoisson;
        m.peak = peak;
        m.mask = std::move(mask);
        return m;
    }

    bool is_poisson() const {
        return kind == NoiseKind::Poisson || kind == NoiseKind::MaskedPoisson;
    }
    bool is_masked() const {
        return kind == NoiseKind::MaskedGaussian || kind == NoiseKind::MaskedPoisson;
    }

    // expected_mask_size = 0 skips the dimension check.
    void validate(std::size_t expected_mask_size = 0) const {
        if (sigma < 0.0)
            throw std::invalid_argument("DegradationModel: sigma must be >= 0");
        if (is_poisson() && !(peak > 0.0))
            throw std::invalid_argument("DegradationModel: peak must be positive");
        if (is_masked()) {
            if (mask.empty())
                throw std::invalid_argument("DegradationModel: masked variant without mask");
            if (expected_mask_size != 0 && mask.size() != expected_mask_size)
                throw std::invalid_argument("DegradationModel: mask size mismatch");
            for (std::uint8_t v : mask)
                if (v > 1)
                    throw std::invalid_argument("DegradationModel: mask entries must be 0 or 1");
        } else if (!mask.empty()) {
            throw std::invalid_argument("DegradationModel: mask set on unmasked variant");
        }
    }
};

}  // namespace snis

#endif
