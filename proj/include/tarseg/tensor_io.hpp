#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "tarseg/tensor.hpp"

namespace tarseg {

// Single-tensor interchange file: magic "TSR1", u32 rank, u32 dims, f32
// payload, all little-endian.
void write_tensor(std::ostream& out, const Tensor& t);
void write_tensor(const std::string& path, const Tensor& t);
Tensor read_tensor(std::istream& in);
Tensor read_tensor(const std::string& path);

// Named collection of TSR1 records: magic "TSRA", u32 count, then per
// entry u32 name length, name bytes, full TSR1 record. Entries are kept
// sorted by name so the byte stream is deterministic.
class TensorArchive {
public:
    void put(const std::string& name, Tensor t) { entries_[name] = std::move(t); }
    bool contains(const std::string& name) const { return entries_.count(name) != 0; }

    // Throws IoError naming the missing entry.
    const Tensor& get(const std::string& name) const;

    const std::map<std::string, Tensor>& entries() const { return entries_; }

    void save(const std::string& path) const;
    static TensorArchive load(const std::string& path);

private:
    std::map<std::string, Tensor> entries_;
};

}  // namespace tarseg
