#include "snis/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "snis/errors.hpp"

namespace snis {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::span<const double> patch_span(const Patch& p) {
    return {p.values.data(), p.values.size()};
}

double observed_mean(const Patch& y, const DegradationModel& model, const PatchDataset& ds) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t l = 0; l < y.values.size(); ++l) {
        if (model.is_masked() && model.mask[l] == 0) continue;
        sum += y.values[l];
        ++count;
    }
    if (count > 0) return sum / static_cast<double>(count);
    return 0.5 * (model.is_poisson() ? model.peak : ds.nominal_peak);
}

// x-hat starts from the noisy observation; missing pixels start from the
// mean of the observed ones.
std::vector<double> initial_estimate(const Patch& y, const DegradationModel& model,
                                     const PatchDataset& ds, EstimationMode mode) {
    if (mode == EstimationMode::CentralPixel) {
        std::size_t c = central_index(y.side);
        if (model.is_masked() && model.mask[c] == 0)
            return {observed_mean(y, model, ds)};
        return {y.values[c]};
    }
    std::vector<double> est = y.values;
    if (model.is_masked()) {
        double fill = observed_mean(y, model, ds);
        for (std::size_t l = 0; l < est.size(); ++l)
            if (model.mask[l] == 0) est[l] = fill;
    }
    return est;
}

void check_patch_inputs(const Patch& y, const PatchDataset& ds, const DegradationModel& model) {
    y.validate();
    if (static_cast<std::uint32_t>(y.values.size()) != ds.n)
        throw std::invalid_argument("estimator: patch/dataset dimension mismatch");
    model.validate(y.values.size());
}

}  // namespace

void ProposalWeights::validate() const {
    if (alpha.empty())
        throw std::invalid_argument("ProposalWeights: empty");
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0))
            throw std::invalid_argument("ProposalWeights: negative or NaN weight");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("ProposalWeights: weights do not sum to 1");
}

double ProposalWeights::entropy() const {
    double h = 0.0;
    for (double a : alpha)
        if (a > 0.0) h -= a * std::log(a);
    return h;
}

double clean_scale_for(const DegradationModel& model, const PatchDataset& ds) {
    if (!model.is_poisson()) return 1.0;
    return model.peak / ds.nominal_peak;
}

std::vector<double> compute_bk(const std::vector<DrawnSample>& samples, const PatchDataset& ds,
                               std::span<const double> estimate, const Patch& y,
                               const DegradationModel& model, const ClusterModel& cm,
                               EstimationMode mode, double clean_scale) {
    check_patch_inputs(y, ds, model);
    const bool central = mode == EstimationMode::CentralPixel;
    if (estimate.size() != (central ? 1u : static_cast<std::size_t>(ds.n)))
        throw std::invalid_argument("compute_bk: estimate size does not match mode");

    std::vector<double> b(cm.k, 0.0);
    if (samples.empty()) return b;

    std::vector<double> ll(samples.size());
    double max_ll = kNegInf;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        ll[s] = loglik<float>(model, patch_span(y), ds.row(samples[s].patch_index), clean_scale).value;
        max_ll = std::max(max_ll, ll[s]);
    }
    if (max_ll == kNegInf) return b;  // every sample impossible

    const std::size_t c = central ? central_index(y.side) : 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (ll[s] == kNegInf) continue;
        double lik = std::exp(ll[s] - max_ll);
        auto row = ds.row(samples[s].patch_index);
        double term;
        if (central) {
            term = std::sqrt(std::abs(clean_scale * row[c] - estimate[0]) * lik);
        } else {
            double acc = 0.0;
            for (std::uint32_t d = 0; d < ds.n; ++d)
                acc += std::sqrt(std::abs(clean_scale * row[d] - estimate[d]));
            term = std::sqrt(lik) * acc;
        }
        b[samples[s].cluster_id] += term;
    }
    for (std::uint32_t k = 0; k < cm.k; ++k)
        b[k] /= std::sqrt(static_cast<double>(cm.members[k].size()));
    return b;
}

ProposalWeights optimize_alpha(std::span<const double> b) {
    if (b.empty())
        throw std::invalid_argument("optimize_alpha: empty scores");
    double sum_sq = 0.0;
    for (double v : b) {
        if (!(v >= 0.0))
            throw std::invalid_argument("optimize_alpha: scores must be non-negative");
        sum_sq += v * v;
    }
    ProposalWeights w;
    w.alpha.resize(b.size());
    if (sum_sq == 0.0) {
        std::fill(w.alpha.begin(), w.alpha.end(), 1.0 / static_cast<double>(b.size()));
    } else {
        for (std::size_t k = 0; k < b.size(); ++k) w.alpha[k] = b[k] * b[k] / sum_sq;
    }
    return w;
}

std::vector<std::size_t> allocate_samples(const ProposalWeights& weights, std::size_t total) {
    weights.validate();
    if (total < 1)
        throw std::invalid_argument("allocate_samples: total must be >= 1");

    const std::size_t k = weights.alpha.size();
    std::vector<std::size_t> counts(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double quota = weights.alpha[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(quota));
        remainder[i] = quota - std::floor(quota);
        assigned += counts[i];
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[order[i]];
    return counts;
}

double snis_log_weight(std::uint32_t cluster, double log_lik, const ClusterModel& cm,
                       const ProposalWeights& weights) {
    if (cluster >= cm.k || weights.alpha.size() != cm.k)
        throw std::invalid_argument("snis_log_weight: cluster id out of range");
    if (std::isnan(log_lik))
        throw std::invalid_argument("snis_log_weight: NaN log-likelihood");
    if (!(weights.alpha[cluster] > 0.0))
        throw std::logic_error("snis_log_weight: sample drawn from zero-weight cluster");
    return std::log(cm.mass[cluster]) + log_lik - std::log(weights.alpha[cluster]);
}

namespace {

// Shared exp-normalization; returns per-sample weights in (0,1] and throws
// AllWeightsZero if every log-weight is -inf.
std::vector<double> exp_normalized(const std::vector<WeightedSample>& samples) {
    double mx = kNegInf;
    for (const auto& s : samples) {
        if (std::isnan(s.log_weight))
            throw std::invalid_argument("weighted_average: NaN log-weight");
        mx = std::max(mx, s.log_weight);
    }
    if (mx == kNegInf)
        throw AllWeightsZero("weighted average undefined: all sample weights are zero");
    std::vector<double> w(samples.size(), 0.0);
    for (std::size_t j = 0; j < samples.size(); ++j)
        if (samples[j].log_weight != kNegInf) w[j] = std::exp(samples[j].log_weight - mx);
    return w;
}

}  // namespace

double weighted_average_central(const std::vector<WeightedSample>& samples,
                                const PatchDataset& ds, double clean_scale) {
    auto w = exp_normalized(samples);
    const std::size_t c = central_index(ds.side());
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        if (w[j] == 0.0) continue;
        num += w[j] * clean_scale * ds.row(samples[j].patch_index)[c];
        den += w[j];
    }
    return num / den;
}

Patch weighted_average_patch(const std::vector<WeightedSample>& samples, const PatchDataset& ds,
                             double clean_scale) {
    auto w = exp_normalized(samples);
    Patch out;
    out.side = ds.side();
    out.values.assign(ds.n, 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        if (w[j] == 0.0) continue;
        auto row = ds.row(samples[j].patch_index);
        for (std::uint32_t d = 0; d < ds.n; ++d)
            out.values[d] += w[j] * clean_scale * row[d];
        den += w[j];
    }
    for (double& v : out.values) v /= den;
    return out;
}

PatchRestoreResult restore_patch(const Patch& y, const PatchDataset& ds, const ClusterModel& cm,
                                 const DegradationModel& model, const RestorationConfig& cfg,
                                 Rng& rng, bool exhaustive) {
    cfg.validate();
    check_patch_inputs(y, ds, model);
    if (cm.n != ds.n || cm.count != ds.count)
        throw std::invalid_argument("restore_patch: cluster model does not match dataset");

    const double scale = clean_scale_for(model, ds);
    PatchRestoreResult out;
    std::vector<double> xhat = initial_estimate(y, model, ds, cfg.mode);

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        // Stage one: uniform draws score the clusters and fit the mixture.
        std::vector<DrawnSample> uniform_draws;
        if (exhaustive) {
            uniform_draws.resize(ds.count);
            for (std::uint64_t i = 0; i < ds.count; ++i)
                uniform_draws[i] = {i, cm.assignment[i]};
        } else {
            auto idx = sample_uniform(ds, static_cast<std::size_t>(cfg.alpha_samples), rng);
            uniform_draws.reserve(idx.size());
            for (std::uint64_t i : idx) uniform_draws.push_back({i, cm.assignment[i]});
        }
        std::vector<double> b =
            compute_bk(uniform_draws, ds, xhat, y, model, cm, cfg.mode, scale);
        ProposalWeights alpha = optimize_alpha(b);
        out.alpha_entropy.push_back(alpha.entropy());
        out.likelihood_evals += uniform_draws.size();

        // Stage two: draw from the fitted mixture and re-estimate.
        std::vector<WeightedSample> weighted;
        if (exhaustive) {
            for (std::uint32_t k = 0; k < cm.k; ++k) {
                if (!(alpha.alpha[k] > 0.0)) continue;
                for (std::uint32_t idx : cm.members[k]) {
                    double ll = loglik<float>(model, patch_span(y), ds.row(idx), scale).value;
                    weighted.push_back({idx, k, snis_log_weight(k, ll, cm, alpha)});
                }
            }
        } else {
            auto counts = allocate_samples(alpha, static_cast<std::size_t>(cfg.snis_samples));
            for (std::uint32_t k = 0; k < cm.k; ++k) {
                if (counts[k] == 0) continue;
                for (std::uint64_t idx : sample_cluster(cm, k, counts[k], rng)) {
                    double ll = loglik<float>(model, patch_span(y), ds.row(idx), scale).value;
                    weighted.push_back({idx, k, snis_log_weight(k, ll, cm, alpha)});
                }
            }
        }
        out.likelihood_evals += weighted.size();

        try {
            if (cfg.mode == EstimationMode::CentralPixel) {
                xhat[0] = weighted_average_central(weighted, ds, scale);
            } else {
                xhat = weighted_average_patch(weighted, ds, scale).values;
            }
        } catch (AllWeightsZero& e) {
            e.alpha = alpha.alpha;
            e.sigma = model.sigma;
            throw;
        }
    }

    out.estimate = std::move(xhat);
    return out;
}

MmseEstimate exact_mmse(const Patch& y, const PatchDataset& ds, const DegradationModel& model) {
    check_patch_inputs(y, ds, model);
    const double scale = clean_scale_for(model, ds);

    std::vector<double> ll(ds.count);
    double mx = kNegInf;
    for (std::uint64_t i = 0; i < ds.count; ++i) {
        ll[i] = loglik<float>(model, patch_span(y), ds.row(i), scale).value;
        mx = std::max(mx, ll[i]);
    }
    if (mx == kNegInf)
        throw AllWeightsZero("exact MMSE undefined: zero likelihood across the dataset");

    MmseEstimate est;
    est.patch.side = ds.side();
    est.patch.values.assign(ds.n, 0.0);
    double den = 0.0;
    for (std::uint64_t i = 0; i < ds.count; ++i) {
        if (ll[i] == kNegInf) continue;
        double w = std::exp(ll[i] - mx);
        auto row = ds.row(i);
        for (std::uint32_t d = 0; d < ds.n; ++d)
            est.patch.values[d] += w * scale * row[d];
        den += w;
    }
    for (double& v : est.patch.values) v /= den;
    est.central = est.patch.values[central_index(est.patch.side)];
    return est;
}

MmseEstimate uniform_baseline(const Patch& y, const PatchDataset& ds,
                              const DegradationModel& model, std::size_t samples, Rng& rng,
                              bool exhaustive) {
    check_patch_inputs(y, ds, model);
    if (!exhaustive && samples < 1)
        throw std::invalid_argument("uniform_baseline: need at least one sample");
    const double scale = clean_scale_for(model, ds);

    std::vector<std::uint64_t> idx;
    if (exhaustive) {
        idx.resize(ds.count);
        std::iota(idx.begin(), idx.end(), 0);
    } else {
        idx = sample_uniform(ds, samples, rng);
    }

    // Equal proposal weights, so the importance weight is the likelihood.
    std::vector<WeightedSample> ws;
    ws.reserve(idx.size());
    for (std::uint64_t i : idx)
        ws.push_back({i, 0, loglik<float>(model, patch_span(y), ds.row(i), scale).value});

    MmseEstimate est;
    est.patch = weighted_average_patch(ws, ds, scale);
    est.central = est.patch.values[central_index(est.patch.side)];
    return est;
}

}  // namespace snis
