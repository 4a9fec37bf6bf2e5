// Procedural glyph corpora for tests: structured stroke images whose patch
// population clusters well, with per-class shape layouts and per-instance
// jitter so held-out instances have close but not identical patches.
#ifndef SNIS_TESTS_SYNTHETIC_HPP
#define SNIS_TESTS_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "snis/image.hpp"

namespace snis::testing {

struct GlyphStyle {
    int size = 48;
    int min_strokes = 5;
    int max_strokes = 9;
    double background = 12.0;
    double foreground = 235.0;
};

// (seed, class_id, instance) fully determine the image; instances of one
// class share the stroke layout up to small jitter.
Image render_glyph(std::uint64_t seed, std::uint64_t class_id, std::uint64_t instance,
                   const GlyphStyle& style = {});

// classes*instances images in class-major order.
std::vector<Image> glyph_corpus(std::uint64_t seed, int classes, int instances,
                                const GlyphStyle& style = {});

}  // namespace snis::testing

#endif
