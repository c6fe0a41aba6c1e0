#include "wsseg/image/raster.hpp"

namespace wsseg {

Image downscale_box(const Image& image, int factor) {
  if (factor < 1) throw ConfigError("downscale factor must be >= 1");
  const int h = image.height / factor;
  const int w = image.width / factor;
  if (h < 1 || w < 1) throw DataError("image too small for downscale factor " + std::to_string(factor));
  Image out(h, w, image.channels);
  const int area = factor * factor;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < image.channels; ++ch) {
        int acc = 0;
        for (int i = 0; i < factor; ++i)
          for (int j = 0; j < factor; ++j) acc += image.at(r * factor + i, c * factor + j, ch);
        out.at(r, c, ch) = static_cast<std::uint8_t>((acc + area / 2) / area);
      }
  return out;
}

}  // namespace wsseg
