#include "snis/dataset.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "binio.hpp"
#include "snis/errors.hpp"

namespace snis {

int PatchDataset::side() const {
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (static_cast<std::uint32_t>(s) * s != n)
        throw std::invalid_argument("PatchDataset: n is not a perfect square");
    return s;
}

void PatchDataset::validate() const {
    if (n == 0)
        throw std::invalid_argument("PatchDataset: n must be positive");
    if (count == 0)
        throw std::invalid_argument("PatchDataset: empty dataset");
    if (data.size() != static_cast<std::size_t>(count) * n)
        throw std::invalid_argument("PatchDataset: data size does not match count*n");
    for (float v : data)
        if (!std::isfinite(v))
            throw std::invalid_argument("PatchDataset: non-finite value");
}

std::vector<int> patch_offsets(int extent, int side, int stride) {
    if (side > extent)
        throw std::invalid_argument("patch_offsets: side exceeds image extent");
    if (stride < 1)
        throw std::invalid_argument("patch_offsets: stride must be >= 1");
    std::vector<int> offsets;
    int last = extent - side;
    for (int o = 0; o <= last; o += stride) offsets.push_back(o);
    if (offsets.back() != last) offsets.push_back(last);
    return offsets;
}

Patch extract_patch(const Image& img, int row0, int col0, int side) {
    Patch p;
    p.side = side;
    p.values.resize(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            p.values[static_cast<std::size_t>(r) * side + c] = img.at(row0 + r, col0 + c);
    return p;
}

std::vector<ExtractedPatch> extract_patches(const Image& img, int side, int stride) {
    img.validate();
    if (side > img.width || side > img.height)
        throw std::invalid_argument("extract_patches: side exceeds image dimensions");
    auto rows = patch_offsets(img.height, side, stride);
    auto cols = patch_offsets(img.width, side, stride);

    std::vector<ExtractedPatch> out;
    out.reserve(rows.size() * cols.size());
    for (int r0 : rows)
        for (int c0 : cols)
            out.push_back({extract_patch(img, r0, c0, side), r0, c0});
    return out;
}

PatchDataset build_dataset(const std::vector<Image>& images, int side, int stride) {
    if (images.empty())
        throw std::invalid_argument("build_dataset: no images");

    PatchDataset ds;
    ds.n = static_cast<std::uint32_t>(side) * static_cast<std::uint32_t>(side);
    ds.nominal_peak = images.front().peak;
    for (const Image& img : images) {
        if (img.peak > ds.nominal_peak) ds.nominal_peak = img.peak;
        auto patches = extract_patches(img, side, stride);
        for (const ExtractedPatch& ep : patches)
            for (double v : ep.patch.values)
                ds.data.push_back(static_cast<float>(v));
        ds.count += patches.size();
    }
    ds.validate();
    return ds;
}

PatchDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open dataset file " + path);
    detail::expect_magic(in, "SNPD", path);
    auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != 1)
        throw IoError("unsupported SNPD version in " + path);

    PatchDataset ds;
    ds.n = detail::read_pod<std::uint32_t>(in, path);
    ds.count = detail::read_pod<std::uint64_t>(in, path);
    if (ds.n == 0 || ds.count == 0)
        throw IoError("empty dataset in " + path);
    ds.data.resize(static_cast<std::size_t>(ds.count) * ds.n);
    detail::read_array(in, ds.data.data(), ds.data.size(), path);
    ds.validate();
    return ds;
}

void save_dataset(const PatchDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write dataset file " + path);
    out.write("SNPD", 4);
    detail::write_pod(out, std::uint32_t{1});
    detail::write_pod(out, ds.n);
    detail::write_pod(out, ds.count);
    detail::write_array(out, ds.data.data(), ds.data.size());
    if (!out)
        throw IoError("short write to " + path);
}

std::vector<std::uint64_t> sample_uniform(const PatchDataset& ds, std::size_t count, Rng& rng) {
    std::uniform_int_distribution<std::uint64_t> pick(0, ds.count - 1);
    std::vector<std::uint64_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = pick(rng);
    return out;
}

}  // namespace snis
