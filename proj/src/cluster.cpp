#include "snis/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "binio.hpp"
#include "snis/errors.hpp"
#include "snis/parallel.hpp"

namespace snis {

namespace {

double sq_dist(std::span<const float> x, const double* centroid, std::uint32_t n) {
    double d2 = 0.0;
    for (std::uint32_t j = 0; j < n; ++j) {
        double d = static_cast<double>(x[j]) - centroid[j];
        d2 += d * d;
    }
    return d2;
}

// k-means++ seeding: first centroid uniform, then proportional to the
// squared distance to the nearest chosen centroid.
std::vector<double> seed_centroids(const PatchDataset& ds, std::uint32_t k, Rng& rng) {
    const std::uint32_t n = ds.n;
    std::vector<double> centroids(static_cast<std::size_t>(k) * n);

    std::uniform_int_distribution<std::uint64_t> pick(0, ds.count - 1);
    std::uint64_t first = pick(rng);
    for (std::uint32_t j = 0; j < n; ++j) centroids[j] = ds.row(first)[j];

    std::vector<double> dist2(ds.count);
    for (std::uint64_t i = 0; i < ds.count; ++i)
        dist2[i] = sq_dist(ds.row(i), centroids.data(), n);

    for (std::uint32_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : dist2) total += d;

        std::uint64_t chosen;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            double acc = 0.0;
            chosen = ds.count - 1;
            for (std::uint64_t i = 0; i < ds.count; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);  // all points coincide with chosen centroids
        }

        double* dst = centroids.data() + static_cast<std::size_t>(c) * n;
        for (std::uint32_t j = 0; j < n; ++j) dst[j] = ds.row(chosen)[j];
        for (std::uint64_t i = 0; i < ds.count; ++i)
            dist2[i] = std::min(dist2[i], sq_dist(ds.row(i), dst, n));
    }
    return centroids;
}

std::vector<std::uint64_t> cluster_sizes(const std::vector<std::uint32_t>& assignment,
                                         std::uint32_t k) {
    std::vector<std::uint64_t> sizes(k, 0);
    for (std::uint32_t a : assignment) ++sizes[a];
    return sizes;
}

// Moves the member of the largest cluster farthest from that cluster's
// centroid into each empty cluster. Ties break toward lower indices.
void repair_empty_clusters(const PatchDataset& ds, std::uint32_t k,
                           std::vector<std::uint32_t>& assignment,
                           std::vector<double>& centroids) {
    auto sizes = cluster_sizes(assignment, k);
    for (std::uint32_t empty = 0; empty < k; ++empty) {
        if (sizes[empty] > 0) continue;

        std::uint32_t big = 0;
        for (std::uint32_t c = 1; c < k; ++c)
            if (sizes[c] > sizes[big]) big = c;
        if (sizes[big] <= 1)
            throw std::runtime_error("cluster repair: no donor cluster available");

        const double* big_centroid = centroids.data() + static_cast<std::size_t>(big) * ds.n;
        double worst = -1.0;
        std::uint64_t donor = 0;
        for (std::uint64_t i = 0; i < ds.count; ++i) {
            if (assignment[i] != big) continue;
            double d2 = sq_dist(ds.row(i), big_centroid, ds.n);
            if (d2 > worst) {
                worst = d2;
                donor = i;
            }
        }

        assignment[donor] = empty;
        double* dst = centroids.data() + static_cast<std::size_t>(empty) * ds.n;
        for (std::uint32_t j = 0; j < ds.n; ++j) dst[j] = ds.row(donor)[j];
        --sizes[big];
        ++sizes[empty];
    }
}

ClusterModel finalize_model(const PatchDataset& ds, std::uint32_t k,
                            std::vector<std::uint32_t> assignment,
                            std::vector<double> centroids) {
    ClusterModel cm;
    cm.k = k;
    cm.n = ds.n;
    cm.count = ds.count;
    cm.assignment = std::move(assignment);
    cm.centroids = std::move(centroids);
    cm.members.assign(k, {});
    for (std::uint64_t i = 0; i < ds.count; ++i)
        cm.members[cm.assignment[i]].push_back(static_cast<std::uint32_t>(i));
    cm.mass.resize(k);
    for (std::uint32_t c = 0; c < k; ++c)
        cm.mass[c] = static_cast<double>(cm.members[c].size()) / static_cast<double>(ds.count);
    cm.validate();
    return cm;
}

void check_cluster_args(const PatchDataset& ds, std::uint32_t k) {
    ds.validate();
    if (k == 0)
        throw std::invalid_argument("clustering: k must be >= 1");
    if (k > ds.count)
        throw std::invalid_argument("clustering: k exceeds dataset size");
}

}  // namespace

void ClusterModel::validate() const {
    if (k == 0 || n == 0 || count == 0)
        throw std::invalid_argument("ClusterModel: empty model");
    if (assignment.size() != count || members.size() != k || mass.size() != k ||
        centroids.size() != static_cast<std::size_t>(k) * n)
        throw std::invalid_argument("ClusterModel: inconsistent sizes");

    std::uint64_t total = 0;
    double mass_sum = 0.0;
    for (std::uint32_t c = 0; c < k; ++c) {
        if (members[c].empty())
            throw std::invalid_argument("ClusterModel: empty cluster");
        total += members[c].size();
        mass_sum += mass[c];
        for (std::uint32_t idx : members[c]) {
            if (idx >= count || assignment[idx] != c)
                throw std::invalid_argument("ClusterModel: members/assignment mismatch");
        }
    }
    if (total != count)
        throw std::invalid_argument("ClusterModel: members do not partition the dataset");
    if (std::abs(mass_sum - 1.0) > 1e-12)
        throw std::invalid_argument("ClusterModel: masses do not sum to 1");
}

ClusterModel cluster_kmeans(const PatchDataset& ds, std::uint32_t k, std::uint64_t seed,
                            int max_iter, int threads) {
    check_cluster_args(ds, k);
    Rng rng = make_stream(seed, 0x6b6d65616e73ull);  // "kmeans"
    std::vector<double> centroids = seed_centroids(ds, k, rng);

    const std::uint32_t n = ds.n;
    std::vector<std::uint32_t> assignment(ds.count, 0);
    bool have_assignment = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::uint32_t> next(ds.count);
        parallel_for(ds.count, threads, [&](std::size_t i) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t arg = 0;
            for (std::uint32_t c = 0; c < k; ++c) {
                double d2 = sq_dist(ds.row(i), centroids.data() + static_cast<std::size_t>(c) * n, n);
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            next[i] = arg;
        });
        repair_empty_clusters(ds, k, next, centroids);

        bool stable = have_assignment && next == assignment;
        assignment = std::move(next);
        have_assignment = true;

        // Means update in fixed index order.
        std::fill(centroids.begin(), centroids.end(), 0.0);
        auto sizes = cluster_sizes(assignment, k);
        for (std::uint64_t i = 0; i < ds.count; ++i) {
            double* dst = centroids.data() + static_cast<std::size_t>(assignment[i]) * n;
            auto row = ds.row(i);
            for (std::uint32_t j = 0; j < n; ++j) dst[j] += row[j];
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            double* dst = centroids.data() + static_cast<std::size_t>(c) * n;
            for (std::uint32_t j = 0; j < n; ++j) dst[j] /= static_cast<double>(sizes[c]);
        }

        if (stable) break;
    }
    return finalize_model(ds, k, std::move(assignment), std::move(centroids));
}

ClusterModel cluster_cem(const PatchDataset& ds, std::uint32_t k, std::uint64_t seed,
                         int max_iter, int threads) {
    check_cluster_args(ds, k);
    const std::uint32_t n = ds.n;

    // Overall data variance sets the variance floor.
    double mean_all = 0.0;
    for (float v : ds.data) mean_all += v;
    mean_all /= static_cast<double>(ds.data.size());
    double var_all = 0.0;
    for (float v : ds.data) {
        double d = v - mean_all;
        var_all += d * d;
    }
    var_all /= static_cast<double>(ds.data.size());
    const double var_floor = std::max(1e-6 * var_all, 1e-12);

    Rng rng = make_stream(seed, 0x63656dull);  // "cem"
    std::vector<double> means = seed_centroids(ds, k, rng);
    std::vector<double> vars(static_cast<std::size_t>(k) * n, std::max(var_all, var_floor));
    std::vector<double> log_pi(k, -std::log(static_cast<double>(k)));

    std::vector<std::uint32_t> assignment(ds.count, 0);
    bool have_assignment = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        // Per-component constants: log pi_k - 0.5 * sum_d ln(2 pi v_kd).
        std::vector<double> log_const(k);
        for (std::uint32_t c = 0; c < k; ++c) {
            double acc = 0.0;
            const double* v = vars.data() + static_cast<std::size_t>(c) * n;
            for (std::uint32_t j = 0; j < n; ++j) acc += std::log(2.0 * std::numbers::pi * v[j]);
            log_const[c] = log_pi[c] - 0.5 * acc;
        }

        std::vector<std::uint32_t> next(ds.count);
        parallel_for(ds.count, threads, [&](std::size_t i) {
            auto row = ds.row(i);
            double best = -std::numeric_limits<double>::infinity();
            std::uint32_t arg = 0;
            for (std::uint32_t c = 0; c < k; ++c) {
                const double* mu = means.data() + static_cast<std::size_t>(c) * n;
                const double* v = vars.data() + static_cast<std::size_t>(c) * n;
                double quad = 0.0;
                for (std::uint32_t j = 0; j < n; ++j) {
                    double d = row[j] - mu[j];
                    quad += d * d / v[j];
                }
                double score = log_const[c] - 0.5 * quad;
                if (score > best) {
                    best = score;
                    arg = c;
                }
            }
            next[i] = arg;
        });
        repair_empty_clusters(ds, k, next, means);

        bool stable = have_assignment && next == assignment;
        assignment = std::move(next);
        have_assignment = true;

        // M-step from the hard assignment.
        auto sizes = cluster_sizes(assignment, k);
        std::fill(means.begin(), means.end(), 0.0);
        for (std::uint64_t i = 0; i < ds.count; ++i) {
            double* mu = means.data() + static_cast<std::size_t>(assignment[i]) * n;
            auto row = ds.row(i);
            for (std::uint32_t j = 0; j < n; ++j) mu[j] += row[j];
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            double* mu = means.data() + static_cast<std::size_t>(c) * n;
            for (std::uint32_t j = 0; j < n; ++j) mu[j] /= static_cast<double>(sizes[c]);
        }
        std::fill(vars.begin(), vars.end(), 0.0);
        for (std::uint64_t i = 0; i < ds.count; ++i) {
            const double* mu = means.data() + static_cast<std::size_t>(assignment[i]) * n;
            double* v = vars.data() + static_cast<std::size_t>(assignment[i]) * n;
            auto row = ds.row(i);
            for (std::uint32_t j = 0; j < n; ++j) {
                double d = row[j] - mu[j];
                v[j] += d * d;
            }
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            double* v = vars.data() + static_cast<std::size_t>(c) * n;
            for (std::uint32_t j = 0; j < n; ++j)
                v[j] = std::max(v[j] / static_cast<double>(sizes[c]), var_floor);
        }
        for (std::uint32_t c = 0; c < k; ++c)
            log_pi[c] = std::log(static_cast<double>(sizes[c]) / static_cast<double>(ds.count));

        if (stable) break;
    }
    return finalize_model(ds, k, std::move(assignment), std::move(means));
}

ClusterModel load_clusters(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open cluster file " + path);
    detail::expect_magic(in, "SNCM", path);
    auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != 1)
        throw IoError("unsupported SNCM version in " + path);

    ClusterModel cm;
    cm.k = detail::read_pod<std::uint32_t>(in, path);
    cm.n = detail::read_pod<std::uint32_t>(in, path);
    cm.count = detail::read_pod<std::uint64_t>(in, path);
    if (cm.k == 0 || cm.n == 0 || cm.count == 0)
        throw IoError("empty cluster model in " + path);

    cm.assignment.resize(cm.count);
    detail::read_array(in, cm.assignment.data(), cm.count, path);
    cm.mass.resize(cm.k);
    detail::read_array(in, cm.mass.data(), cm.k, path);
    std::vector<float> cf(static_cast<std::size_t>(cm.k) * cm.n);
    detail::read_array(in, cf.data(), cf.size(), path);
    cm.centroids.assign(cf.begin(), cf.end());

    cm.members.assign(cm.k, {});
    for (std::uint64_t i = 0; i < cm.count; ++i) {
        if (cm.assignment[i] >= cm.k)
            throw IoError("assignment out of range in " + path);
        cm.members[cm.assignment[i]].push_back(static_cast<std::uint32_t>(i));
    }
    cm.validate();
    return cm;
}

void save_clusters(const ClusterModel& cm, const std::string& path) {
    cm.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write cluster file " + path);
    out.write("SNCM", 4);
    detail::write_pod(out, std::uint32_t{1});
    detail::write_pod(out, cm.k);
    detail::write_pod(out, cm.n);
    detail::write_pod(out, cm.count);
    detail::write_array(out, cm.assignment.data(), cm.assignment.size());
    detail::write_array(out, cm.mass.data(), cm.mass.size());
    std::vector<float> cf(cm.centroids.begin(), cm.centroids.end());
    detail::write_array(out, cf.data(), cf.size());
    if (!out)
        throw IoError("short write to " + path);
}

std::vector<std::uint64_t> sample_cluster(const ClusterModel& cm, std::uint32_t k,
                                          std::size_t count, Rng& rng) {
    if (k >= cm.k)
        throw std::invalid_argument("sample_cluster: cluster id out of range");
    const auto& m = cm.members[k];
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    std::vector<std::uint64_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = m[pick(rng)];
    return out;
}

}  // namespace snis
