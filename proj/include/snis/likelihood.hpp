#ifndef SNIS_LIKELIHOOD_HPP
#define SNIS_LIKELIHOOD_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "snis/degradation.hpp"

namespace snis {

// Log-density/mass up to an additive constant independent of x. The value
// may be -inf (impossible sample) but never NaN. Constants are dropped
// throughout; self-normalization makes them irrelevant.
struct LogLikelihood {
    double value;
};

namespace detail {
// Floor applied to x inside ln(x) for Poisson terms with y == 0, so clean
// patches containing exact zeros stay usable.
inline constexpr double kPoissonLogFloor = 1e-12;
}  // namespace detail

// -sum_{mask} (y_l - x_l)^2 / (2 sigma^2). An empty mask span means all
// pixels observed; a mask of zeros yields 0 regardless of x.
template <class XT>
LogLikelihood loglik_gaussian(std::span<const double> y, std::span<const XT> x, double sigma,
                              std::span<const std::uint8_t> mask = {}, double x_scale = 1.0) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("loglik_gaussian: sigma must be > 0");
    if (x.size() != y.size() || (!mask.empty() && mask.size() != y.size()))
        throw std::invalid_argument("loglik_gaussian: dimension mismatch");

    double ss = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l) {
        if (!mask.empty() && mask[l] == 0) continue;
        double d = y[l] - x_scale * static_cast<double>(x[l]);
        ss += d * d;
    }
    return {-ss / (2.0 * sigma * sigma)};
}

// sum_{mask} [ y_l ln(x_l^+) - x_l^+ ] with x^+ = max(x, 1e-12); the ln(y!)
// term is constant in x and dropped. Masked-out pixels contribute 0. A pixel
// with y_l > 0 and x_l <= 0 makes the sample impossible (-inf).
template <class XT>
LogLikelihood loglik_poisson(std::span<const double> y, std::span<const XT> x,
                             std::span<const std::uint8_t> mask = {}, double x_scale = 1.0) {
    if (x.size() != y.size() || (!mask.empty() && mask.size() != y.size()))
        throw std::invalid_argument("loglik_poisson: dimension mismatch");

    double acc = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l) {
        if (!mask.empty() && mask[l] == 0) continue;
        double yl = y[l];
        if (yl < 0.0 || std::floor(yl) != yl)
            throw std::invalid_argument("loglik_poisson: counts must be non-negative integers");
        double xl = x_scale * static_cast<double>(x[l]);
        if (xl <= 0.0 && yl > 0.0)
            return {-std::numeric_limits<double>::infinity()};
        double xp = std::max(xl, detail::kPoissonLogFloor);
        acc += yl * std::log(xp) - xp;
    }
    return {acc};
}

// Dispatch over the model kind. clean_scale rescales x onto the
// observation's intensity scale before evaluation (Poisson peak handling);
// pass 1 when both sides already share a scale.
template <class XT>
LogLikelihood loglik(const DegradationModel& model, std::span<const double> y,
                     std::span<const XT> x, double clean_scale = 1.0) {
    std::span<const std::uint8_t> mask;
    if (model.is_masked()) mask = {model.mask.data(), model.mask.size()};

    switch (model.kind) {
        case NoiseKind::Gaussian:
        case NoiseKind::MaskedGaussian:
            return loglik_gaussian<XT>(y, x, model.sigma, mask, clean_scale);
        case NoiseKind::Poisson:
        case NoiseKind::MaskedPoisson:
            return loglik_poisson<XT>(y, x, mask, clean_scale);
    }
    throw std::logic_error("loglik: unknown model kind");
}

}  // namespace snis

#endif
