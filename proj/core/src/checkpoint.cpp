#include "tempogan/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace tempogan {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {
constexpr char kMagic[4] = {'T', 'G', 'C', 'K'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
void get(std::istream& is, T& v, const std::string& path) {
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw std::runtime_error("checkpoint: truncated file " + path);
}
} // namespace

void save_checkpoint(const std::string& path, uint64_t config_hash, int64_t iteration,
                     const std::vector<StateView<float>>& buffers) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, config_hash);
    put(os, iteration);
    put(os, uint32_t(buffers.size()));
    for (const auto& b : buffers) {
        put(os, uint32_t(b.name.size()));
        os.write(b.name.data(), std::streamsize(b.name.size()));
        put(os, uint64_t(b.value->size()));
        os.write(reinterpret_cast<const char*>(b.value->data()),
                 std::streamsize(b.value->size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

int64_t load_checkpoint(const std::string& path, uint64_t expected_hash,
                        const std::vector<StateView<float>>& buffers) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint32_t version;
    get(is, version, path);
    if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version in " + path);
    uint64_t hash;
    int64_t iteration;
    get(is, hash, path);
    get(is, iteration, path);
    if (hash != expected_hash)
        throw std::runtime_error("checkpoint: config hash mismatch for " + path);
    uint32_t count;
    get(is, count, path);

    std::map<std::string, StateView<float>> by_name;
    for (const auto& b : buffers) by_name[b.name] = b;
    std::size_t loaded = 0;
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t name_len;
        get(is, name_len, path);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len))
            throw std::runtime_error("checkpoint: truncated file " + path);
        uint64_t n;
        get(is, n, path);
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw std::runtime_error("checkpoint: unknown buffer '" + name + "' in " + path);
        if (it->second.value->size() != n)
            throw std::runtime_error("checkpoint: size mismatch for '" + name + "' in " + path);
        if (!is.read(reinterpret_cast<char*>(it->second.value->data()),
                     std::streamsize(n * sizeof(float))))
            throw std::runtime_error("checkpoint: truncated file " + path);
        ++loaded;
    }
    if (loaded != buffers.size())
        throw std::runtime_error("checkpoint: missing buffers in " + path);
    return iteration;
}

void read_checkpoint_header(const std::string& path, uint64_t& config_hash, int64_t& iteration) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint32_t version;
    get(is, version, path);
    get(is, config_hash, path);
    get(is, iteration, path);
}

} // namespace tempogan
