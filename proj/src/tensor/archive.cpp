#include "wsseg/tensor/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "wsseg/common/error.hpp"

namespace wsseg {
namespace {

constexpr char kMagic[4] = {'W', 'S', 'G', '1'};

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_++]) << (8 * i));
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("tensor archive truncated");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_archive(const std::vector<ArchiveEntry>& entries) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.name.size() > 0xFFFF) throw ConfigError("archive name too long: " + e.name);
    if (e.dims.size() > 0xFF) throw ConfigError("archive rank too large: " + e.name);
    std::size_t count = 1;
    for (auto d : e.dims) count *= d;
    if (count != e.data.size()) throw ConfigError("archive entry '" + e.name + "' size mismatch");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    out.push_back(static_cast<std::uint8_t>(e.dims.size()));
    for (auto d : e.dims) put<std::uint32_t>(out, d);
    for (float f : e.data) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<ArchiveEntry> decode_archive(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("not a tensor archive (bad magic)");
  }
  Reader r(bytes);
  r.str(4);
  const auto count = r.get<std::uint32_t>();
  std::vector<ArchiveEntry> entries;
  entries.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    ArchiveEntry e;
    e.name = r.str(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    std::size_t n = 1;
    for (int i = 0; i < rank; ++i) {
      e.dims.push_back(r.get<std::uint32_t>());
      n *= e.dims.back();
    }
    e.data.resize(n);
    for (auto& f : e.data) f = std::bit_cast<float>(r.get<std::uint32_t>());
    entries.push_back(std::move(e));
  }
  if (!r.done()) throw DataError("trailing bytes after tensor archive");
  return entries;
}

void write_archive(const std::filesystem::path& path, const std::vector<ArchiveEntry>& entries) {
  const auto bytes = encode_archive(entries);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("failed writing " + path.string());
}

std::vector<ArchiveEntry> read_archive(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

}  // namespace wsseg
