#include "dtcn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dtcn {

namespace {

constexpr char kMagic[8] = {'D', 'T', 'C', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const NamedTensors& entries) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(os, kVersion);
    write_pod<std::uint64_t>(os, entries.size());
    for (const auto& [name, tensor] : entries) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t d : tensor.shape()) write_pod<std::uint64_t>(os, d);
        os.write(reinterpret_cast<const char*>(tensor.data()),
                 static_cast<std::streamsize>(tensor.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failure on " + path);
}

NamedTensors load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported format version");
    }
    const auto count = read_pod<std::uint64_t>(is);
    NamedTensors entries;
    entries.reserve(count);
    for (std::uint64_t e = 0; e < count; ++e) {
        const auto name_len = read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto rank = read_pod<std::uint32_t>(is);
        if (rank != 1 && rank != 2) throw std::runtime_error("checkpoint: bad rank");
        std::uint64_t d0 = read_pod<std::uint64_t>(is);
        Tensor t = rank == 1 ? Tensor(static_cast<std::size_t>(d0))
                             : Tensor(static_cast<std::size_t>(d0),
                                      static_cast<std::size_t>(read_pod<std::uint64_t>(is)));
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint: truncated payload");
        entries.emplace_back(std::move(name), std::move(t));
    }
    return entries;
}

}  // namespace dtcn
