#pragma once

#include <filesystem>

#include "wsseg/image/raster.hpp"

namespace wsseg {

/// 8-bit PNG read, converted to `channels` (1 = gray/label, 3 = RGB).
Raster<std::uint8_t> read_png(const std::filesystem::path& path, int channels);
/// Writes a 1-channel (gray) or 3-channel (RGB) 8-bit PNG.
void write_png(const std::filesystem::path& path, const Raster<std::uint8_t>& raster);

}  // namespace wsseg
