#include "snis/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "snis/errors.hpp"
#include "snis/parallel.hpp"

namespace snis {

namespace {

// Symmetric mirror index: ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
int mirror(int i, int extent) {
    if (i < 0) return -i - 1;
    if (i >= extent) return 2 * extent - 1 - i;
    return i;
}

Image mirror_pad(const Image& img, int border) {
    Image out;
    out.width = img.width + 2 * border;
    out.height = img.height + 2 * border;
    out.peak = img.peak;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int r = 0; r < out.height; ++r)
        for (int c = 0; c < out.width; ++c)
            out.at(r, c) = img.at(mirror(r - border, img.height), mirror(c - border, img.width));
    return out;
}

std::vector<std::uint8_t> mirror_pad_mask(const std::vector<std::uint8_t>& mask, int w, int h,
                                          int border) {
    int pw = w + 2 * border, ph = h + 2 * border;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(pw) * ph);
    for (int r = 0; r < ph; ++r)
        for (int c = 0; c < pw; ++c)
            out[static_cast<std::size_t>(r) * pw + c] =
                mask[static_cast<std::size_t>(mirror(r - border, h)) * w + mirror(c - border, w)];
    return out;
}

std::vector<std::uint8_t> slice_mask(const std::vector<std::uint8_t>& mask, int w, int r0, int c0,
                                     int side) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            out[static_cast<std::size_t>(r) * side + c] =
                mask[static_cast<std::size_t>(r0 + r) * w + (c0 + c)];
    return out;
}

DegradationModel patch_model(const DegradationModel& image_model,
                             const std::vector<std::uint8_t>& padded_mask, int padded_width,
                             int r0, int c0, int side) {
    DegradationModel m = image_model;
    if (m.is_masked()) m.mask = slice_mask(padded_mask, padded_width, r0, c0, side);
    return m;
}

}  // namespace

std::string RestorationReport::to_kv() const {
    std::ostringstream os;
    os << "psnr_db=" << psnr_db << "\n";
    os << "patches_processed=" << patches_processed << "\n";
    os << "likelihood_evaluations=" << likelihood_evaluations << "\n";
    os << "wall_seconds=" << wall_seconds << "\n";
    os << "sigma_escalations=" << sigma_escalations << "\n";
    for (std::size_t i = 0; i < alpha_entropy.size(); ++i)
        os << "alpha_entropy_iter" << (i + 1) << "=" << alpha_entropy[i] << "\n";
    return os.str();
}

std::string RestorationReport::csv_header() {
    return "psnr_db,patches_processed,likelihood_evaluations,wall_seconds,sigma_escalations";
}

std::string RestorationReport::to_csv_row() const {
    std::ostringstream os;
    os << psnr_db << "," << patches_processed << "," << likelihood_evaluations << ","
       << wall_seconds << "," << sigma_escalations;
    return os.str();
}

Image degrade(const Image& image, const DegradationModel& model, Rng& rng) {
    image.validate();
    model.validate(model.is_masked() ? image.pixels.size() : 0);

    Image out = image;
    switch (model.kind) {
        case NoiseKind::Gaussian:
        case NoiseKind::MaskedGaussian: {
            if (model.sigma > 0.0) {
                std::normal_distribution<double> noise(0.0, model.sigma);
                for (double& v : out.pixels) v += noise(rng);
            }
            break;
        }
        case NoiseKind::Poisson:
        case NoiseKind::MaskedPoisson: {
            double scale = model.peak / image.peak;
            for (double& v : out.pixels) {
                double mean = std::max(0.0, v * scale);
                if (mean > 0.0) {
                    std::poisson_distribution<long> counts(mean);
                    v = static_cast<double>(counts(rng));
                } else {
                    v = 0.0;
                }
            }
            out.peak = model.peak;
            break;
        }
    }
    if (model.is_masked())
        for (std::size_t i = 0; i < out.pixels.size(); ++i)
            if (model.mask[i] == 0) out.pixels[i] = 0.0;
    return out;
}

PatchRestoreResult restore_patch_escalating(const Patch& y, const PatchDataset& ds,
                                            const ClusterModel& cm, const DegradationModel& model,
                                            const RestorationConfig& cfg, Rng& rng,
                                            std::size_t* escalations) {
    if (model.kind != NoiseKind::MaskedGaussian)
        return restore_patch(y, ds, cm, model, cfg, rng);

    DegradationModel m = model;
    m.sigma = model.sigma > 0.0 ? model.sigma : cfg.sigma_init;
    for (int attempt = 0;; ++attempt) {
        try {
            return restore_patch(y, ds, cm, m, cfg, rng);
        } catch (AllWeightsZero& e) {
            if (attempt >= kMaxSigmaEscalations) {
                e.sigma = m.sigma;
                throw;
            }
            m.sigma *= cfg.sigma_escalation_factor;
            if (escalations) ++*escalations;
        }
    }
}

std::pair<Image, RestorationReport> restore_image(const Image& observed,
                                                  const DegradationModel& model,
                                                  const PatchDataset& ds, const ClusterModel& cm,
                                                  const RestorationConfig& cfg, int threads) {
    auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    observed.validate();
    model.validate(model.is_masked() ? observed.pixels.size() : 0);
    if (cm.n != ds.n || cm.count != ds.count)
        throw std::invalid_argument("restore_image: cluster model does not match dataset");
    if (static_cast<std::uint32_t>(cfg.patch_side) * cfg.patch_side != cm.n)
        throw std::invalid_argument("restore_image: cfg.patch_side does not match cluster model");
    if (static_cast<std::uint32_t>(cfg.clusters) != cm.k)
        throw std::invalid_argument("restore_image: cfg.clusters does not match cluster model");
    if (observed.width < cfg.patch_side || observed.height < cfg.patch_side)
        throw std::invalid_argument("restore_image: image smaller than patch side");

    const int side = cfg.patch_side;
    const bool central = cfg.mode == EstimationMode::CentralPixel;
    const int border = central ? side / 2 : 0;

    Image padded = central ? mirror_pad(observed, border) : observed;
    std::vector<std::uint8_t> padded_mask;
    if (model.is_masked())
        padded_mask = central ? mirror_pad_mask(model.mask, observed.width, observed.height, border)
                              : model.mask;

    // One task per output pixel (CentralPixel) or per extracted patch
    // (WholePatch); top-left offsets in the padded frame.
    struct Task {
        int r0, c0;
    };
    std::vector<Task> tasks;
    if (central) {
        tasks.reserve(static_cast<std::size_t>(observed.width) * observed.height);
        for (int r = 0; r < observed.height; ++r)
            for (int c = 0; c < observed.width; ++c) tasks.push_back({r, c});
    } else {
        for (int r0 : patch_offsets(observed.height, side, cfg.stride))
            for (int c0 : patch_offsets(observed.width, side, cfg.stride)) tasks.push_back({r0, c0});
    }

    struct Slot {
        PatchRestoreResult result;
        std::size_t escalations = 0;
        bool failed = false;
        std::string error;
    };
    std::vector<Slot> slots(tasks.size());

    parallel_for(tasks.size(), threads, [&](std::size_t t) {
        const Task& task = tasks[t];
        Patch y = extract_patch(padded, task.r0, task.c0, side);
        DegradationModel pm = patch_model(model, padded_mask, padded.width, task.r0, task.c0, side);
        Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(task.r0),
                              static_cast<std::uint64_t>(task.c0));
        try {
            slots[t].result =
                restore_patch_escalating(y, ds, cm, pm, cfg, rng, &slots[t].escalations);
        } catch (const AllWeightsZero& e) {
            slots[t].failed = true;
            slots[t].error = e.what();
        }
    });

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (slots[t].failed) {
            AllWeightsZero e("patch at (" + std::to_string(tasks[t].r0) + "," +
                             std::to_string(tasks[t].c0) + ") failed after sigma escalation: " +
                             slots[t].error);
            throw e;
        }
    }

    Image out;
    out.width = observed.width;
    out.height = observed.height;
    out.peak = model.is_poisson() ? model.peak : observed.peak;
    out.pixels.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);

    if (central) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            out.at(tasks[t].r0, tasks[t].c0) = slots[t].result.estimate[0];
    } else {
        // Uniform overlap averaging, accumulated in fixed task order.
        std::vector<double> hits(out.pixels.size(), 0.0);
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const auto& est = slots[t].result.estimate;
            for (int r = 0; r < side; ++r)
                for (int c = 0; c < side; ++c) {
                    std::size_t px =
                        static_cast<std::size_t>(tasks[t].r0 + r) * out.width + (tasks[t].c0 + c);
                    out.pixels[px] += est[static_cast<std::size_t>(r) * side + c];
                    hits[px] += 1.0;
                }
        }
        for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] /= hits[i];
    }

    RestorationReport report;
    report.patches_processed = tasks.size();
    report.alpha_entropy.assign(static_cast<std::size_t>(cfg.iterations), 0.0);
    for (const Slot& s : slots) {
        report.likelihood_evaluations += s.result.likelihood_evals;
        report.sigma_escalations += s.escalations;
        for (std::size_t i = 0; i < s.result.alpha_entropy.size() &&
                                i < report.alpha_entropy.size();
             ++i)
            report.alpha_entropy[i] += s.result.alpha_entropy[i];
    }
    for (double& h : report.alpha_entropy) h /= static_cast<double>(tasks.size());
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(out), std::move(report)};
}

double psnr(const Image& reference, const Image& estimate, double peak) {
    if (reference.width != estimate.width || reference.height != estimate.height)
        throw std::invalid_argument("psnr: dimension mismatch");
    if (!(peak > 0.0))
        throw std::invalid_argument("psnr: peak must be positive");

    double mse = 0.0;
    for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
        double d = reference.pixels[i] - estimate.pixels[i];
        mse += d * d;
    }
    mse /= static_cast<double>(reference.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace snis
