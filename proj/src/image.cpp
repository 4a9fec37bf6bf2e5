#include "snis/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "snis/errors.hpp"

namespace snis {

void Image::validate() const {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("Image: non-positive dimensions");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("Image: pixel count does not match width*height");
    if (!(peak > 0.0))
        throw std::invalid_argument("Image: peak must be positive");
    for (double v : pixels)
        if (!std::isfinite(v))
            throw std::invalid_argument("Image: non-finite pixel value");
}

void Patch::validate() const {
    if (side <= 0)
        throw std::invalid_argument("Patch: non-positive side");
    if (values.size() != static_cast<std::size_t>(side) * side)
        throw std::invalid_argument("Patch: value count does not match side^2");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("Patch: non-finite value");
}

std::size_t central_index(int side) {
    if (side <= 0 || side % 2 == 0)
        throw std::invalid_argument("central_index: side must be odd and positive");
    std::size_t s = static_cast<std::size_t>(side);
    return (s * s - 1) / 2;
}

namespace {

// Skips whitespace and '#' comment lines between PGM header tokens.
int next_header_int(std::istream& in, const std::string& path) {
    for (;;) {
        int ch = in.peek();
        if (ch == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(ch)) {
            in.get();
            continue;
        }
        break;
    }
    int value = -1;
    if (!(in >> value))
        throw IoError("malformed PGM header in " + path);
    return value;
}

std::string sidecar_path(const std::string& path) { return path + ".meta"; }

}  // namespace

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image file " + path);

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5')
        throw IoError("not a binary PGM (P5) file: " + path);

    Image img;
    img.width = next_header_int(in, path);
    img.height = next_header_int(in, path);
    int maxval = next_header_int(in, path);
    if (img.width <= 0 || img.height <= 0)
        throw IoError("bad PGM dimensions in " + path);
    if (maxval != 255)
        throw IoError("unsupported PGM maxval (expected 255) in " + path);
    in.get();  // single whitespace after maxval

    std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    std::vector<std::uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw IoError("truncated PGM data in " + path);

    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = static_cast<double>(raw[i]);

    std::ifstream meta(sidecar_path(path));
    if (meta) {
        std::string line;
        while (std::getline(meta, line)) {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            if (line.substr(0, eq) == "peak")
                img.peak = std::stod(line.substr(eq + 1));
        }
    }

    img.validate();
    return img;
}

void write_pgm(const Image& img, const std::string& path) {
    img.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write image file " + path);

    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::size_t n = img.pixels.size();
    std::vector<std::uint8_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::lround(std::clamp(img.pixels[i], 0.0, 255.0));
        raw[i] = static_cast<std::uint8_t>(v);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!out)
        throw IoError("short write to " + path);

    std::error_code ec;
    if (img.peak != 255.0) {
        std::ofstream meta(sidecar_path(path), std::ios::trunc);
        if (!meta)
            throw IoError("cannot write sidecar " + sidecar_path(path));
        meta << "peak=" << std::setprecision(17) << img.peak << "\n";
    } else {
        std::filesystem::remove(sidecar_path(path), ec);  // drop stale metadata
    }
}

}  // namespace snis
