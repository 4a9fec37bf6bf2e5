#include "snis/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "snis/benchmark.hpp"
#include "snis/cluster.hpp"
#include "snis/config.hpp"
#include "snis/dataset.hpp"
#include "snis/degradation.hpp"
#include "snis/errors.hpp"
#include "snis/estimator.hpp"
#include "snis/image.hpp"
#include "snis/pipeline.hpp"

namespace snis {

namespace {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_mask(const std::string& path) {
    Image m = read_pgm(path);
    std::vector<std::uint8_t> mask(m.pixels.size());
    for (std::size_t i = 0; i < m.pixels.size(); ++i) mask[i] = m.pixels[i] > 0.0 ? 1 : 0;
    return mask;
}

// gaussian:S | poisson:P | inpaint:S:maskfile | poisson-inpaint:P:maskfile
DegradationModel parse_model(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty())
        throw std::invalid_argument("empty model string");

    try {
        if (parts[0] == "gaussian" && parts.size() == 2)
            return DegradationModel::gaussian(std::stod(parts[1]));
        if (parts[0] == "poisson" && parts.size() == 2)
            return DegradationModel::poisson(std::stod(parts[1]));
        if (parts[0] == "inpaint" && parts.size() == 3)
            return DegradationModel::masked_gaussian(std::stod(parts[1]), read_mask(parts[2]));
        if (parts[0] == "poisson-inpaint" && parts.size() == 3)
            return DegradationModel::masked_poisson(std::stod(parts[1]), read_mask(parts[2]));
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad model parameter in '" + spec + "'");
    }
    throw std::invalid_argument(
        "unknown model '" + spec +
        "' (expected gaussian:S | poisson:P | inpaint:S:mask | poisson-inpaint:P:mask)");
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad config line (expected key=value): " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

int env_threads() {
    const char* env = std::getenv("SNIS_THREADS");
    if (!env) return 0;
    return std::max(0, std::atoi(env));
}

EstimationMode parse_mode(const std::string& mode) {
    if (mode == "central") return EstimationMode::CentralPixel;
    if (mode == "whole") return EstimationMode::WholePatch;
    throw std::invalid_argument("unknown mode '" + mode + "' (expected central|whole)");
}

std::vector<std::string> list_pgm_files(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw IoError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw IoError("no .pgm images in " + dir);
    return files;
}

struct RestoreArgs {
    std::string input, dataset, clusters, model_str, mode = "whole", output;
    std::string reference, report_path, config_path;
    RestorationConfig cfg;
    int threads = -1;
};

void apply_restore_config(RestoreArgs& a, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "m")
            a.cfg.alpha_samples = std::stoi(value);
        else if (key == "n")
            a.cfg.snis_samples = std::stoi(value);
        else if (key == "iterations")
            a.cfg.iterations = std::stoi(value);
        else if (key == "stride")
            a.cfg.stride = std::stoi(value);
        else if (key == "seed")
            a.cfg.seed = std::stoull(value);
        else if (key == "sigma-init")
            a.cfg.sigma_init = std::stod(value);
        else if (key == "sigma-escalation-factor")
            a.cfg.sigma_escalation_factor = std::stod(value);
        else if (key == "mode")
            a.mode = value;
        else if (key == "model")
            a.model_str = value;
        else if (key == "threads")
            a.threads = std::stoi(value);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

int cmd_build_dataset(const std::string& input_dir, int side, int stride,
                      const std::string& out) {
    std::vector<Image> images;
    for (const std::string& f : list_pgm_files(input_dir)) images.push_back(read_pgm(f));
    PatchDataset ds = build_dataset(images, side, stride);
    save_dataset(ds, out);
    std::cout << "count=" << ds.count << "\nn=" << ds.n << "\n";
    return 0;
}

int cmd_cluster(const std::string& dataset, int k, std::uint64_t seed, const std::string& algo,
                int max_iter, int threads, const std::string& out) {
    PatchDataset ds = load_dataset(dataset);
    ClusterModel cm;
    if (algo == "kmeans")
        cm = cluster_kmeans(ds, static_cast<std::uint32_t>(k), seed, max_iter, threads);
    else if (algo == "cem")
        cm = cluster_cem(ds, static_cast<std::uint32_t>(k), seed, max_iter, threads);
    else
        throw std::invalid_argument("unknown algorithm '" + algo + "' (expected kmeans|cem)");
    save_clusters(cm, out);
    for (std::uint32_t c = 0; c < cm.k; ++c)
        std::cout << "cluster " << c << ": size=" << cm.members[c].size()
                  << " mass=" << cm.mass[c] << "\n";
    return 0;
}

int cmd_degrade(const std::string& input, const std::string& model_str, std::uint64_t seed,
                const std::string& out) {
    Image img = read_pgm(input);
    DegradationModel model = parse_model(model_str);
    Rng rng = make_stream(seed);
    Image noisy = degrade(img, model, rng);
    write_pgm(noisy, out);
    std::cout << "peak=" << noisy.peak << "\n";
    return 0;
}

int cmd_make_mask(int width, int height, double observed, std::uint64_t seed,
                  const std::string& out) {
    if (!(observed >= 0.0 && observed <= 1.0))
        throw std::invalid_argument("--observed must be in [0,1]");
    Rng rng = make_stream(seed, 0x6d61736bull);  // "mask"
    std::bernoulli_distribution keep(observed);
    Image mask;
    mask.width = width;
    mask.height = height;
    mask.pixels.resize(static_cast<std::size_t>(width) * height);
    for (double& v : mask.pixels) v = keep(rng) ? 255.0 : 0.0;
    write_pgm(mask, out);
    return 0;
}

int cmd_make_patchset(const std::string& input_dir, int count, int side,
                      const std::string& model_str, std::uint64_t seed, const std::string& out) {
    DegradationModel model = parse_model(model_str);
    if (model.is_masked())
        throw std::invalid_argument("make-patchset supports unmasked models only");
    std::vector<Image> images;
    for (const std::string& f : list_pgm_files(input_dir)) images.push_back(read_pgm(f));
    for (const Image& img : images)
        if (img.width < side || img.height < side)
            throw std::invalid_argument("image smaller than patch side in " + input_dir);

    PatchPairSet pairs;
    pairs.n = static_cast<std::uint32_t>(side) * side;
    pairs.count = static_cast<std::uint64_t>(count);
    pairs.peak = model.is_poisson() ? model.peak : images.front().peak;

    Rng rng = make_stream(seed, 0x7061697273ull);  // "pairs"
    std::uniform_int_distribution<std::size_t> pick_img(0, images.size() - 1);
    for (int i = 0; i < count; ++i) {
        const Image& img = images[pick_img(rng)];
        std::uniform_int_distribution<int> pick_r(0, img.height - side);
        std::uniform_int_distribution<int> pick_c(0, img.width - side);
        Patch clean = extract_patch(img, pick_r(rng), pick_c(rng), side);

        // Degrade the patch as a tiny image; truth is stored on the
        // observation's intensity scale.
        Image tile;
        tile.width = side;
        tile.height = side;
        tile.peak = img.peak;
        tile.pixels = clean.values;
        Image noisy = degrade(tile, model, rng);
        double truth_scale = model.is_poisson() ? model.peak / img.peak : 1.0;
        for (double v : noisy.pixels) pairs.degraded.push_back(static_cast<float>(v));
        for (double v : clean.values) pairs.clean.push_back(static_cast<float>(v * truth_scale));
    }
    save_patch_pairs(pairs, out);
    std::cout << "count=" << pairs.count << "\nn=" << pairs.n << "\npeak=" << pairs.peak << "\n";
    return 0;
}

int cmd_restore(RestoreArgs& a) {
    if (!a.config_path.empty()) apply_restore_config(a, read_config_file(a.config_path));

    Image observed = read_pgm(a.input);
    PatchDataset ds = load_dataset(a.dataset);
    ClusterModel cm = load_clusters(a.clusters);
    DegradationModel model = parse_model(a.model_str);

    a.cfg.mode = parse_mode(a.mode);
    a.cfg.patch_side = ds.side();
    a.cfg.clusters = static_cast<int>(cm.k);
    if (a.cfg.alpha_samples < static_cast<int>(cm.k))
        throw std::invalid_argument("restore: --m must be at least the cluster count");
    int threads = a.threads >= 0 ? a.threads : env_threads();

    auto [restored, report] = restore_image(observed, model, ds, cm, a.cfg, threads);
    write_pgm(restored, a.output);

    if (!a.reference.empty()) {
        Image ref = read_pgm(a.reference);
        report.psnr_db = psnr(ref, restored, restored.peak);
        std::cout << "psnr_in=" << psnr(ref, observed, restored.peak) << "\n";
    }
    std::cout << "mode=" << a.mode << "\n" << report.to_kv();
    if (!a.report_path.empty()) {
        std::ofstream rep(a.report_path, std::ios::trunc);
        if (!rep)
            throw IoError("cannot write report file " + a.report_path);
        rep << "mode=" << a.mode << "\n" << report.to_kv();
    }
    return 0;
}

struct BenchmarkArgs {
    std::string patches, dataset, clusters, model_str, budgets_str, methods_str = "snis,uniform";
    std::string output, config_path;
    double alpha_fraction = 0.6;
    std::uint64_t seed = 0;
    int seed_count = 1;
    int threads = -1;
};

void apply_benchmark_config(BenchmarkArgs& a, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "alpha-fraction")
            a.alpha_fraction = std::stod(value);
        else if (key == "seed")
            a.seed = std::stoull(value);
        else if (key == "seeds")
            a.seed_count = std::stoi(value);
        else if (key == "budgets")
            a.budgets_str = value;
        else if (key == "methods")
            a.methods_str = value;
        else if (key == "model")
            a.model_str = value;
        else if (key == "threads")
            a.threads = std::stoi(value);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

int cmd_benchmark(BenchmarkArgs& a) {
    if (!a.config_path.empty()) apply_benchmark_config(a, read_config_file(a.config_path));

    PatchPairSet pairs = load_patch_pairs(a.patches);
    PatchDataset ds = load_dataset(a.dataset);
    ClusterModel cm = load_clusters(a.clusters);
    DegradationModel model = parse_model(a.model_str);

    BenchmarkOptions opts;
    for (const std::string& b : split_list(a.budgets_str))
        opts.budgets.push_back(std::stoull(b));
    opts.methods = split_list(a.methods_str);
    opts.alpha_fraction = a.alpha_fraction;
    opts.seed = a.seed;
    opts.seed_count = a.seed_count;
    opts.threads = a.threads >= 0 ? a.threads : env_threads();

    auto rows = run_benchmark(pairs, ds, cm, model, opts);
    std::string csv = benchmark_csv(rows);
    if (a.output.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(a.output, std::ios::trunc);
        if (!out)
            throw IoError("cannot write CSV file " + a.output);
        out << csv;
        std::cout << "rows=" << rows.size() << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Patch-based image restoration by self-normalized importance sampling"};
    app.require_subcommand(1);

    // build-dataset
    std::string bd_input, bd_out;
    int bd_side = 9, bd_stride = 2;
    auto* bd = app.add_subcommand("build-dataset", "Extract clean patches from a PGM directory");
    bd->add_option("--input", bd_input, "directory of .pgm images")->required();
    bd->add_option("--side", bd_side, "patch side (odd)");
    bd->add_option("--stride", bd_stride, "extraction stride");
    bd->add_option("--out", bd_out, "output dataset file")->required();

    // cluster
    std::string cl_dataset, cl_algo = "kmeans", cl_out;
    int cl_k = 20, cl_max_iter = 50, cl_threads = -1;
    std::uint64_t cl_seed = 0;
    auto* cl = app.add_subcommand("cluster", "Partition a patch dataset");
    cl->add_option("--dataset", cl_dataset)->required();
    cl->add_option("--k", cl_k, "cluster count")->required();
    cl->add_option("--seed", cl_seed);
    cl->add_option("--algo", cl_algo, "kmeans|cem");
    cl->add_option("--max-iter", cl_max_iter);
    cl->add_option("--threads", cl_threads);
    cl->add_option("--out", cl_out)->required();

    // degrade
    std::string dg_in, dg_model, dg_out;
    std::uint64_t dg_seed = 0;
    auto* dg = app.add_subcommand("degrade", "Apply a forward model to an image");
    dg->add_option("--in", dg_in)->required();
    dg->add_option("--model", dg_model)->required();
    dg->add_option("--seed", dg_seed);
    dg->add_option("--out", dg_out)->required();

    // make-mask
    int mm_width = 0, mm_height = 0;
    double mm_observed = 0.5;
    std::uint64_t mm_seed = 0;
    std::string mm_out;
    auto* mm = app.add_subcommand("make-mask", "Random observation mask as a PGM");
    mm->add_option("--width", mm_width)->required();
    mm->add_option("--height", mm_height)->required();
    mm->add_option("--observed", mm_observed, "observed-pixel fraction");
    mm->add_option("--seed", mm_seed);
    mm->add_option("--out", mm_out)->required();

    // make-patchset
    std::string mp_input, mp_model, mp_out;
    int mp_count = 500, mp_side = 9;
    std::uint64_t mp_seed = 0;
    auto* mp = app.add_subcommand("make-patchset",
                                  "Degraded/clean patch pairs for the benchmark");
    mp->add_option("--input", mp_input, "directory of clean .pgm images")->required();
    mp->add_option("--count", mp_count);
    mp->add_option("--side", mp_side);
    mp->add_option("--model", mp_model)->required();
    mp->add_option("--seed", mp_seed);
    mp->add_option("--out", mp_out)->required();

    // restore
    RestoreArgs ra;
    auto* rs = app.add_subcommand("restore", "Restore a degraded image");
    rs->add_option("--in", ra.input)->required();
    rs->add_option("--dataset", ra.dataset)->required();
    rs->add_option("--clusters", ra.clusters)->required();
    rs->add_option("--model", ra.model_str)->required();
    rs->add_option("--mode", ra.mode, "central|whole");
    rs->add_option("--seed", ra.cfg.seed);
    rs->add_option("--stride", ra.cfg.stride);
    rs->add_option("--m", ra.cfg.alpha_samples, "uniform draws per iteration");
    rs->add_option("--n", ra.cfg.snis_samples, "proposal draws per iteration");
    rs->add_option("--iterations", ra.cfg.iterations);
    rs->add_option("--sigma-init", ra.cfg.sigma_init);
    rs->add_option("--sigma-escalation-factor", ra.cfg.sigma_escalation_factor);
    rs->add_option("--threads", ra.threads);
    rs->add_option("--ref", ra.reference, "clean reference for PSNR");
    rs->add_option("--report", ra.report_path, "write the key=value report here");
    rs->add_option("--config", ra.config_path, "key=value file overriding flags");
    rs->add_option("--out", ra.output)->required();

    // benchmark
    BenchmarkArgs ba;
    auto* bm = app.add_subcommand("benchmark", "PSNR vs sample budget on a patch-pair set");
    bm->add_option("--patches", ba.patches, "patch-pair file")->required();
    bm->add_option("--dataset", ba.dataset)->required();
    bm->add_option("--clusters", ba.clusters)->required();
    bm->add_option("--model", ba.model_str)->required();
    bm->add_option("--budgets", ba.budgets_str, "comma-separated budgets")->required();
    bm->add_option("--methods", ba.methods_str, "subset of snis,uniform,exact");
    bm->add_option("--alpha-fraction", ba.alpha_fraction);
    bm->add_option("--seed", ba.seed);
    bm->add_option("--seeds", ba.seed_count, "average PSNR over this many seeds");
    bm->add_option("--threads", ba.threads);
    bm->add_option("--config", ba.config_path, "key=value file overriding flags");
    bm->add_option("--out", ba.output, "CSV output (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (bd->parsed()) return cmd_build_dataset(bd_input, bd_side, bd_stride, bd_out);
        if (cl->parsed())
            return cmd_cluster(cl_dataset, cl_k, cl_seed, cl_algo, cl_max_iter,
                               cl_threads >= 0 ? cl_threads : env_threads(), cl_out);
        if (dg->parsed()) return cmd_degrade(dg_in, dg_model, dg_seed, dg_out);
        if (mm->parsed()) return cmd_make_mask(mm_width, mm_height, mm_observed, mm_seed, mm_out);
        if (mp->parsed())
            return cmd_make_patchset(mp_input, mp_count, mp_side, mp_model, mp_seed, mp_out);
        if (rs->parsed()) return cmd_restore(ra);
        if (bm->parsed()) return cmd_benchmark(ba);
        std::cerr << "no subcommand given\n";
        return 1;
    } catch (const AllWeightsZero& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace snis
