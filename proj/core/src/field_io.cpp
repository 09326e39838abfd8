#include "tempogan/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tempogan {

namespace {
constexpr char kMagic[4] = {'T', 'G', 'F', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("TGF1: truncated header in " + path);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

static_assert(sizeof(float) == 4, "float32 storage required");
} // namespace

void write_tgf(const GridField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("TGF1: cannot open for write: " + path);
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, uint32_t(f.dim()));
    for (int a = 0; a < f.dim(); ++a) put_u32(os, uint32_t(f.shape(a)));
    put_u32(os, uint32_t(f.channels()));
    // Little-endian host assumed (x86/aarch64 LE); payload is the raw buffer.
    os.write(reinterpret_cast<const char*>(f.data()), std::streamsize(f.size() * sizeof(float)));
    if (!os) throw std::runtime_error("TGF1: write failed: " + path);
}

GridField read_tgf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("TGF1: cannot open: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("TGF1: bad magic in " + path);
    const uint32_t version = get_u32(is, path);
    if (version != kVersion) throw std::runtime_error("TGF1: unsupported version in " + path);
    const uint32_t dim = get_u32(is, path);
    if (dim < 2 || dim > 3) throw std::runtime_error("TGF1: bad dim in " + path);
    std::vector<int> shape(dim);
    for (uint32_t a = 0; a < dim; ++a) {
        shape[a] = int(get_u32(is, path));
        if (shape[a] < 1 || shape[a] > (1 << 24)) throw std::runtime_error("TGF1: bad shape in " + path);
    }
    const uint32_t channels = get_u32(is, path);
    if (channels < 1 || channels > 16) throw std::runtime_error("TGF1: bad channels in " + path);
    GridField f(shape, int(channels));
    if (!is.read(reinterpret_cast<char*>(f.data()), std::streamsize(f.size() * sizeof(float))))
        throw std::runtime_error("TGF1: truncated payload in " + path);
    char extra;
    if (is.read(&extra, 1)) throw std::runtime_error("TGF1: trailing bytes in " + path);
    return f;
}

} // namespace tempogan
