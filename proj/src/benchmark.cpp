#include "snis/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"
#include "snis/errors.hpp"
#include "snis/estimator.hpp"
#include "snis/likelihood.hpp"
#include "snis/parallel.hpp"

namespace snis {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double set_psnr(const std::vector<double>& estimates, const PatchPairSet& pairs,
                std::size_t central) {
    double mse = 0.0;
    for (std::uint64_t i = 0; i < pairs.count; ++i) {
        double truth = pairs.clean[static_cast<std::size_t>(i) * pairs.n + central];
        double d = estimates[i] - truth;
        mse += d * d;
    }
    mse /= static_cast<double>(pairs.count);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(pairs.peak * pairs.peak / mse);
}

Patch pair_degraded_patch(const PatchPairSet& pairs, std::uint64_t i) {
    Patch p;
    p.side = pairs.side();
    const float* row = pairs.degraded.data() + static_cast<std::size_t>(i) * pairs.n;
    p.values.assign(row, row + pairs.n);
    return p;
}

// Streaming likelihood-weighted average of central pixels; rescales the
// accumulators whenever a new maximum log-weight arrives.
struct RunningAverage {
    double max_lw = kNegInf;
    double num = 0.0;
    double den = 0.0;

    void add(double lw, double value) {
        if (lw == kNegInf) return;
        if (lw > max_lw) {
            double r = max_lw == kNegInf ? 0.0 : std::exp(max_lw - lw);
            num *= r;
            den *= r;
            max_lw = lw;
        }
        double w = std::exp(lw - max_lw);
        num += w * value;
        den += w;
    }
    bool empty() const { return den == 0.0; }
    double value() const { return num / den; }
};

}  // namespace

int PatchPairSet::side() const {
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (static_cast<std::uint32_t>(s) * s != n)
        throw std::invalid_argument("PatchPairSet: n is not a perfect square");
    return s;
}

void PatchPairSet::validate() const {
    if (n == 0 || count == 0)
        throw std::invalid_argument("PatchPairSet: empty");
    if (!(peak > 0.0))
        throw std::invalid_argument("PatchPairSet: peak must be positive");
    std::size_t expect = static_cast<std::size_t>(count) * n;
    if (degraded.size() != expect || clean.size() != expect)
        throw std::invalid_argument("PatchPairSet: data size does not match count*n");
}

PatchPairSet load_patch_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open patch-pair file " + path);
    detail::expect_magic(in, "SNPP", path);
    auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != 1)
        throw IoError("unsupported SNPP version in " + path);

    PatchPairSet pairs;
    pairs.n = detail::read_pod<std::uint32_t>(in, path);
    pairs.count = detail::read_pod<std::uint64_t>(in, path);
    pairs.peak = detail::read_pod<double>(in, path);
    std::size_t expect = static_cast<std::size_t>(pairs.count) * pairs.n;
    pairs.degraded.resize(expect);
    pairs.clean.resize(expect);
    std::vector<float> record(2 * pairs.n);
    for (std::uint64_t i = 0; i < pairs.count; ++i) {
        detail::read_array(in, record.data(), record.size(), path);
        std::copy_n(record.data(), pairs.n, pairs.degraded.data() + i * pairs.n);
        std::copy_n(record.data() + pairs.n, pairs.n, pairs.clean.data() + i * pairs.n);
    }
    pairs.validate();
    return pairs;
}

void save_patch_pairs(const PatchPairSet& pairs, const std::string& path) {
    pairs.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write patch-pair file " + path);
    out.write("SNPP", 4);
    detail::write_pod(out, std::uint32_t{1});
    detail::write_pod(out, pairs.n);
    detail::write_pod(out, pairs.count);
    detail::write_pod(out, pairs.peak);
    for (std::uint64_t i = 0; i < pairs.count; ++i) {
        detail::write_array(out, pairs.degraded.data() + i * pairs.n, pairs.n);
        detail::write_array(out, pairs.clean.data() + i * pairs.n, pairs.n);
    }
    if (!out)
        throw IoError("short write to " + path);
}

std::vector<BenchmarkRow> run_benchmark(const PatchPairSet& pairs, const PatchDataset& ds,
                                        const ClusterModel& cm, const DegradationModel& model,
                                        const BenchmarkOptions& opts) {
    pairs.validate();
    ds.validate();
    cm.validate();
    model.validate();
    if (model.is_masked())
        throw std::invalid_argument("benchmark: masked models are not supported");
    if (pairs.n != ds.n || cm.n != ds.n || cm.count != ds.count)
        throw std::invalid_argument("benchmark: patch/dataset/cluster dimension mismatch");
    if (opts.methods.empty())
        throw std::invalid_argument("benchmark: no methods given");
    if (opts.seed_count < 1)
        throw std::invalid_argument("benchmark: seed count must be >= 1");
    for (const std::string& m : opts.methods)
        if (m != "snis" && m != "uniform" && m != "exact")
            throw std::invalid_argument("benchmark: unknown method " + m);

    bool needs_budgets =
        std::any_of(opts.methods.begin(), opts.methods.end(),
                    [](const std::string& m) { return m != "exact"; });
    if (needs_budgets) {
        if (opts.budgets.empty())
            throw std::invalid_argument("benchmark: empty budget list");
        for (std::size_t i = 1; i < opts.budgets.size(); ++i)
            if (opts.budgets[i] <= opts.budgets[i - 1])
                throw std::invalid_argument("benchmark: budgets must be strictly increasing");
    }
    if (!(opts.alpha_fraction > 0.0 && opts.alpha_fraction < 1.0))
        throw std::invalid_argument("benchmark: alpha_fraction must be in (0,1)");

    const std::size_t c = central_index(pairs.side());
    const double scale = clean_scale_for(model, ds);
    const std::size_t num_patches = static_cast<std::size_t>(pairs.count);
    std::vector<BenchmarkRow> rows;

    for (const std::string& method : opts.methods) {
        if (method == "exact") {
            auto t0 = std::chrono::steady_clock::now();
            std::vector<double> est(num_patches);
            parallel_for(num_patches, opts.threads, [&](std::size_t i) {
                est[i] = exact_mmse(pair_degraded_patch(pairs, i), ds, model).central;
            });
            double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back({static_cast<std::size_t>(ds.count), method, set_psnr(est, pairs, c), wall});
            continue;
        }

        if (method == "snis") {
            // Every stage needs at least one draw on each side of the split,
            // and the first stage must be able to score every cluster.
            if (opts.budgets.front() < cm.k)
                throw std::invalid_argument("benchmark: smallest budget is below the cluster count");
            std::size_t prev = 0;
            for (std::size_t b : opts.budgets) {
                std::size_t inc = b - prev;
                std::size_t m = static_cast<std::size_t>(
                    std::floor(opts.alpha_fraction * static_cast<double>(inc)));
                if (m < 1 || inc - m < 1)
                    throw std::invalid_argument("benchmark: budget increment too small to split");
                prev = b;
            }
        }

        std::vector<double> psnr_sum(opts.budgets.size(), 0.0);
        std::vector<double> wall_sum(opts.budgets.size(), 0.0);

        for (int s = 0; s < opts.seed_count; ++s) {
            std::vector<Rng> streams;
            streams.reserve(num_patches);
            for (std::size_t i = 0; i < num_patches; ++i)
                streams.push_back(make_stream(opts.seed, static_cast<std::uint64_t>(s), i));

            if (method == "uniform") {
                std::vector<RunningAverage> acc(num_patches);
                std::vector<double> est(num_patches, 0.0);
                std::size_t prev = 0;
                for (std::size_t bi = 0; bi < opts.budgets.size(); ++bi) {
                    auto t0 = std::chrono::steady_clock::now();
                    std::size_t inc = opts.budgets[bi] - prev;
                    parallel_for(num_patches, opts.threads, [&](std::size_t i) {
                        Patch y = pair_degraded_patch(pairs, i);
                        auto idx = sample_uniform(ds, inc, streams[i]);
                        for (std::uint64_t j : idx) {
                            double ll = loglik<float>(model, {y.values.data(), y.values.size()},
                                                      ds.row(j), scale)
                                            .value;
                            acc[i].add(ll, scale * ds.row(j)[c]);
                        }
                        if (acc[i].empty())
                            throw AllWeightsZero("uniform benchmark: all weights zero");
                        est[i] = acc[i].value();
                    });
                    prev = opts.budgets[bi];
                    wall_sum[bi] +=
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    psnr_sum[bi] += set_psnr(est, pairs, c);
                }
            } else {  // snis
                std::vector<double> xhat(num_patches);
                for (std::size_t i = 0; i < num_patches; ++i)
                    xhat[i] = pairs.degraded[static_cast<std::size_t>(i) * pairs.n + c];

                std::size_t prev = 0;
                for (std::size_t bi = 0; bi < opts.budgets.size(); ++bi) {
                    auto t0 = std::chrono::steady_clock::now();
                    std::size_t inc = opts.budgets[bi] - prev;
                    std::size_t m_draws = static_cast<std::size_t>(
                        std::floor(opts.alpha_fraction * static_cast<double>(inc)));
                    std::size_t n_draws = inc - m_draws;

                    parallel_for(num_patches, opts.threads, [&](std::size_t i) {
                        Patch y = pair_degraded_patch(pairs, i);
                        Rng& rng = streams[i];

                        std::vector<DrawnSample> uniform_draws;
                        uniform_draws.reserve(m_draws);
                        for (std::uint64_t j : sample_uniform(ds, m_draws, rng))
                            uniform_draws.push_back({j, cm.assignment[j]});
                        std::vector<double> xh{xhat[i]};
                        auto b = compute_bk(uniform_draws, ds, xh, y, model, cm,
                                            EstimationMode::CentralPixel, scale);
                        ProposalWeights alpha = optimize_alpha(b);

                        auto counts = allocate_samples(alpha, n_draws);
                        std::vector<WeightedSample> weighted;
                        weighted.reserve(n_draws);
                        for (std::uint32_t k = 0; k < cm.k; ++k) {
                            if (counts[k] == 0) continue;
                            for (std::uint64_t idx : sample_cluster(cm, k, counts[k], rng)) {
                                double ll =
                                    loglik<float>(model, {y.values.data(), y.values.size()},
                                                  ds.row(idx), scale)
                                        .value;
                                weighted.push_back({idx, k, snis_log_weight(k, ll, cm, alpha)});
                            }
                        }
                        xhat[i] = weighted_average_central(weighted, ds, scale);
                    });
                    prev = opts.budgets[bi];
                    wall_sum[bi] +=
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    psnr_sum[bi] += set_psnr(xhat, pairs, c);
                }
            }
        }

        for (std::size_t bi = 0; bi < opts.budgets.size(); ++bi)
            rows.push_back({opts.budgets[bi], method,
                            psnr_sum[bi] / static_cast<double>(opts.seed_count),
                            wall_sum[bi] / static_cast<double>(opts.seed_count)});
    }
    return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream os;
    os << "budget,method,psnr_db,wall_seconds\n";
    for (const BenchmarkRow& r : rows) {
        os << r.budget << "," << r.method << ",";
        if (std::isinf(r.psnr_db))
            os << "inf";
        else
            os << r.psnr_db;
        os << "," << r.wall_seconds << "\n";
    }
    return os.str();
}

}  // namespace snis
