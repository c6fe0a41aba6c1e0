#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wsseg/tensor/tensor.hpp"

namespace wsseg {

/// One named entry of a tensor archive.
struct ArchiveEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

/// Binary layout (little-endian): "WSG1", u32 count, then per entry
/// u16 name length, UTF-8 name, u8 rank, rank x u32 dims, f32 payload.
void write_archive(const std::filesystem::path& path, const std::vector<ArchiveEntry>& entries);
std::vector<ArchiveEntry> read_archive(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_archive(const std::vector<ArchiveEntry>& entries);
std::vector<ArchiveEntry> decode_archive(const std::vector<std::uint8_t>& bytes);

template <typename T>
ArchiveEntry to_entry(const std::string& name, const Tensor<T>& t) {
  const Shape& s = t.shape();
  ArchiveEntry e{name,
                 {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                  static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)},
                 {}};
  e.data.assign(t.values().begin(), t.values().end());
  return e;
}

/// Rank < 4 entries are left-padded with unit dims.
template <typename T>
Tensor<T> to_tensor(const ArchiveEntry& e) {
  if (e.dims.size() > 4) throw DataError("archive entry '" + e.name + "' has rank > 4");
  int d[4] = {1, 1, 1, 1};
  const std::size_t off = 4 - e.dims.size();
  for (std::size_t i = 0; i < e.dims.size(); ++i) d[off + i] = static_cast<int>(e.dims[i]);
  std::vector<T> values(e.data.begin(), e.data.end());
  return Tensor<T>(Shape{d[0], d[1], d[2], d[3]}, std::move(values));
}

}  // namespace wsseg
