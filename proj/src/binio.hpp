// Little-endian binary file helpers shared by the dataset and cluster
// serializers. Not installed; internal to src/.
#ifndef SNIS_SRC_BINIO_HPP
#define SNIS_SRC_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "snis/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace snis::detail {

template <class T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void write_array(std::ofstream& out, const T* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(T)));
}

template <class T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated file " + path);
    return v;
}

template <class T>
void read_array(std::ifstream& in, T* data, std::size_t count, const std::string& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw IoError("truncated file " + path);
}

inline void expect_magic(std::ifstream& in, const char (&magic)[5], const std::string& path) {
    char got[4];
    in.read(got, 4);
    if (!in || std::memcmp(got, magic, 4) != 0)
        throw IoError(std::string("bad magic (expected ") + magic + ") in " + path);
}

}  // namespace snis::detail

#endif
