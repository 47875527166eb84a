#include <cstdint>
#include <cstring>
#include <fstream>

#include "proxemo/errors.hpp"
#include "proxemo/nn.hpp"

namespace proxemo {

namespace {

constexpr char kMagic[8] = {'P', 'X', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint8_t kDtypeF64 = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_str(std::ofstream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return v;
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return v;
}

std::string read_str(std::ifstream& in, const std::string& path) {
    const std::uint32_t len = read_u32(in, path);
    if (len > (1u << 20)) throw FormatError(path + ": implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::map<std::string, std::string>& meta,
                     const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot open for writing: " + path);

    out.write(kMagic, sizeof(kMagic));
    write_u32(out, static_cast<std::uint32_t>(meta.size()));
    for (const auto& [k, v] : meta) {
        write_str(out, k);
        write_str(out, v);
    }
    write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        write_str(out, t.name);
        out.put(static_cast<char>(kDtypeF64));
        write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        std::uint64_t count = 1;
        for (int d : t.shape) {
            write_u32(out, static_cast<std::uint32_t>(d));
            count *= static_cast<std::uint64_t>(d);
        }
        if (count != t.data.size())
            throw ShapeError("checkpoint: shape does not match data size for " + t.name);
        write_u64(out, count);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(count * sizeof(double)));
    }
    if (!out) throw FileError("write failed: " + path);
}

void load_checkpoint(const std::string& path,
                     std::map<std::string, std::string>& meta,
                     std::vector<NamedTensor>& tensors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError(path + ": not a checkpoint file");

    meta.clear();
    tensors.clear();

    const std::uint32_t n_meta = read_u32(in, path);
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = read_str(in, path);
        std::string v = read_str(in, path);
        meta.emplace(std::move(k), std::move(v));
    }

    const std::uint32_t n_tensors = read_u32(in, path);
    tensors.reserve(n_tensors);
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        NamedTensor t;
        t.name = read_str(in, path);
        const int dtype = in.get();
        if (dtype != kDtypeF64) throw FormatError(path + ": unsupported tensor dtype");
        const std::uint32_t ndim = read_u32(in, path);
        if (ndim > 8) throw FormatError(path + ": implausible tensor rank");
        std::uint64_t expect = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            const std::uint32_t dim = read_u32(in, path);
            t.shape.push_back(static_cast<int>(dim));
            expect *= dim;
        }
        const std::uint64_t count = read_u64(in, path);
        if (count != expect) throw FormatError(path + ": tensor size/shape mismatch");
        t.data.resize(count);
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw FormatError(path + ": truncated tensor data");
        tensors.push_back(std::move(t));
    }
}

}  // namespace proxemo
