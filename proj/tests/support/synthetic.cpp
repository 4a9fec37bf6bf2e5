#include "support/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "snis/rng.hpp"

namespace snis::testing {

namespace {

struct Stroke {
    int type;  // 0 segment, 1 ring, 2 disc
    double x0, y0, x1, y1;
    double radius;
    double width;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double point_segment_dist(double px, double py, const Stroke& s) {
    double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? clamp01(((px - s.x0) * dx + (py - s.y0) * dy) / len2) : 0.0;
    double cx = s.x0 + t * dx, cy = s.y0 + t * dy;
    return std::hypot(px - cx, py - cy);
}

// Soft coverage in [0,1]; ~1 inside the stroke, fading over one pixel.
double coverage(double px, double py, const Stroke& s) {
    double d;
    switch (s.type) {
        case 0:
            d = point_segment_dist(px, py, s);
            break;
        case 1:
            d = std::abs(std::hypot(px - s.x0, py - s.y0) - s.radius);
            break;
        default:
            d = std::max(0.0, std::hypot(px - s.x0, py - s.y0) - s.radius);
            break;
    }
    return clamp01(s.width + 0.7 - d);
}

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

Image render_glyph(std::uint64_t seed, std::uint64_t class_id, std::uint64_t instance,
                   const GlyphStyle& style) {
    Rng shape_rng = make_stream(seed, 0x676c797068ull, class_id);           // layout
    Rng jitter_rng = make_stream(seed ^ 0x6a6974746572ull, class_id, instance);

    const double s = static_cast<double>(style.size);
    int strokes = style.min_strokes +
                  static_cast<int>(shape_rng() % static_cast<std::uint64_t>(
                                                     style.max_strokes - style.min_strokes + 1));

    std::vector<Stroke> layout(static_cast<std::size_t>(strokes));
    for (Stroke& st : layout) {
        st.type = static_cast<int>(shape_rng() % 3);
        st.x0 = uniform(shape_rng, 0.08 * s, 0.92 * s);
        st.y0 = uniform(shape_rng, 0.08 * s, 0.92 * s);
        st.x1 = uniform(shape_rng, 0.08 * s, 0.92 * s);
        st.y1 = uniform(shape_rng, 0.08 * s, 0.92 * s);
        st.radius = uniform(shape_rng, 0.05 * s, 0.22 * s);
        st.width = uniform(shape_rng, 0.9, 2.2);

        st.x0 += uniform(jitter_rng, -1.5, 1.5);
        st.y0 += uniform(jitter_rng, -1.5, 1.5);
        st.x1 += uniform(jitter_rng, -1.5, 1.5);
        st.y1 += uniform(jitter_rng, -1.5, 1.5);
        st.radius += uniform(jitter_rng, -0.8, 0.8);
        st.width += uniform(jitter_rng, -0.3, 0.3);
        st.width = std::max(0.6, st.width);
        st.radius = std::max(1.0, st.radius);
    }

    Image img;
    img.width = style.size;
    img.height = style.size;
    img.peak = 255.0;
    img.pixels.resize(static_cast<std::size_t>(style.size) * style.size);
    for (int r = 0; r < style.size; ++r) {
        for (int c = 0; c < style.size; ++c) {
            double cov = 0.0;
            for (const Stroke& st : layout)
                cov = std::max(cov, coverage(static_cast<double>(c), static_cast<double>(r), st));
            img.at(r, c) = style.background + (style.foreground - style.background) * cov;
        }
    }
    return img;
}

std::vector<Image> glyph_corpus(std::uint64_t seed, int classes, int instances,
                                const GlyphStyle& style) {
    std::vector<Image> out;
    out.reserve(static_cast<std::size_t>(classes) * instances);
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < instances; ++i)
            out.push_back(render_glyph(seed, static_cast<std::uint64_t>(c),
                                       static_cast<std::uint64_t>(i), style));
    return out;
}

}  // namespace snis::testing
