#include "tarseg/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tarseg {

static_assert(std::endian::native == std::endian::little,
              "TSR1 serialization assumes a little-endian host");

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw IoError("tensor stream truncated while reading u32");
    return v;
}

void expect_magic(std::istream& in, const char* magic, const char* what) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw IoError(std::string("bad magic, expected ") + magic + " in " + what);
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
    out.write("TSR1", 4);
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
}

void write_tensor(const std::string& path, const Tensor& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_tensor(f, t);
    if (!f) throw IoError("write failed for " + path);
}

Tensor read_tensor(std::istream& in) {
    expect_magic(in, "TSR1", "tensor record");
    const std::uint32_t rank = read_u32(in);
    if (rank > 8) throw IoError("tensor rank " + std::to_string(rank) + " out of range");
    std::vector<int> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
        const std::uint32_t v = read_u32(in);
        if (v == 0 || v > (1u << 28)) throw IoError("tensor dimension out of range");
        d = static_cast<int>(v);
        n *= v;
    }
    std::vector<float> data(n);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw IoError("tensor stream truncated while reading payload");
    return Tensor(std::move(shape), std::move(data));
}

Tensor read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return read_tensor(f);
}

const Tensor& TensorArchive::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw IoError("weights archive is missing entry '" + name + "'");
    return it->second;
}

void TensorArchive::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write("TSRA", 4);
    write_u32(f, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [name, t] : entries_) {
        write_u32(f, static_cast<std::uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_tensor(f, t);
    }
    if (!f) throw IoError("write failed for " + path);
}

TensorArchive TensorArchive::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    expect_magic(f, "TSRA", path.c_str());
    const std::uint32_t count = read_u32(f);
    TensorArchive ar;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = read_u32(f);
        if (len > 4096) throw IoError("archive entry name too long");
        std::string name(len, '\0');
        f.read(name.data(), len);
        if (!f) throw IoError("archive truncated in " + path);
        ar.put(name, read_tensor(f));
    }
    return ar;
}

}  // namespace tarseg
