#ifndef SNIS_IMAGE_HPP
#define SNIS_IMAGE_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace snis {

// 2-D grayscale intensity grid. Intensities stay real-valued end to end;
// quantization happens only on PGM export. `peak` is the nominal maximum
// intensity (255 for 8-bit data, or the Poisson mean scale).
struct Image {
    int width = 0;
    int height = 0;
    double peak = 255.0;
    std::vector<double> pixels;  // row-major, width*height

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }

    // Throws std::invalid_argument if sizes disagree, peak <= 0, or any
    // pixel is non-finite.
    void validate() const;
};

// Square patch of n = side*side intensities, row-major.
struct Patch {
    int side = 0;
    std::vector<double> values;

    void validate() const;
};

// Index of the central pixel of a row-major side*side patch. side must be odd.
std::size_t central_index(int side);

// Binary PGM, P5 with maxval 255. When peak != 255 a sidecar text file
// "<path>.meta" holds key=value lines, currently just "peak=<float>";
// read_pgm picks it up again if present.
Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

}  // namespace snis

#endif
