#ifndef SNIS_ERRORS_HPP
#define SNIS_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace snis {

// File and format failures. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when every sample in a weighted average has log-weight -inf, so
// the self-normalized estimate is undefined. Carries the proposal weights
// of the failing iteration and the likelihood sigma in effect (0 when not
// Gaussian). The CLI maps this to exit code 3.
class AllWeightsZero : public std::runtime_error {
public:
    explicit AllWeightsZero(const std::string& what) : std::runtime_error(what) {}

    std::vector<double> alpha;
    double sigma = 0.0;
};

}  // namespace snis

#endif
