#ifndef SNIS_DATASET_HPP
#define SNIS_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snis/image.hpp"
#include "snis/rng.hpp"

namespace snis {

// Flat store of clean patches drawn from an external corpus; the empirical
// patch prior. Rows are f32 to match the on-disk layout. `nominal_peak` is
// the intensity scale of the source images (255 for PGM corpora); it is not
// serialized and defaults back to 255 on load.
struct PatchDataset {
    std::uint32_t n = 0;      // patch dimensionality, side^2
    std::uint64_t count = 0;
    std::vector<float> data;  // count*n, row-major
    double nominal_peak = 255.0;

    std::span<const float> row(std::uint64_t i) const {
        return {data.data() + i * n, n};
    }
    int side() const;
    void validate() const;
};

struct ExtractedPatch {
    Patch patch;
    int row0 = 0;  // top-left offset in the source image
    int col0 = 0;
};

// Offsets 0, stride, 2*stride, ... plus the clamped final offset so the
// image boundary is always covered. extent is the image dimension.
std::vector<int> patch_offsets(int extent, int side, int stride);

Patch extract_patch(const Image& img, int row0, int col0, int side);

// Row-major by (row0, col0) over the offset grid.
std::vector<ExtractedPatch> extract_patches(const Image& img, int side, int stride);

PatchDataset build_dataset(const std::vector<Image>& images, int side, int stride);

// SNPD: magic "SNPD", u32 version=1, u32 n, u64 count, count*n f32 LE.
PatchDataset load_dataset(const std::string& path);
void save_dataset(const PatchDataset& ds, const std::string& path);

// I.i.d. uniform draws with replacement over dataset rows.
std::vector<std::uint64_t> sample_uniform(const PatchDataset& ds, std::size_t count, Rng& rng);

}  // namespace snis

#endif
