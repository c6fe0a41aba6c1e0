#pragma once

#include <array>

#include "wsseg/image/raster.hpp"

namespace wsseg {

using RealRaster = Raster<double>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// sRGB (D65) to CIE L*a*b*.
Vec3 rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);
/// 3-channel L*a*b* raster.
RealRaster rgb_to_lab(const Image& image);

/// Stain optical-density vectors as rows; row 2 is the residual channel.
struct StainMatrix {
  Mat3 rows{};

  /// Hematoxylin and eosin vectors of Ruifrok & Johnston, residual = their
  /// normalized cross product. All rows unit length.
  static StainMatrix hematoxylin_eosin();
  /// Normalizes the two stain rows and derives the residual row.
  static StainMatrix from_stains(const Vec3& first, const Vec3& second);
};

struct StainImages {
  RealRaster hematoxylin;
  RealRaster eosin;
  StainMatrix matrix;
};

/// -log10((v + 1) / 256) per channel.
Vec3 optical_density(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Unclamped concentrations c with od = c[0]*rows[0] + c[1]*rows[1] + c[2]*rows[2].
/// Throws ConfigError when the matrix is singular.
Vec3 unmix_stains(const Vec3& od, const StainMatrix& m);
Vec3 remix_stains(const Vec3& concentrations, const StainMatrix& m);

/// Per-pixel hematoxylin and eosin concentrations, negatives clamped to 0.
StainImages color_deconvolution(const Image& image,
                                const StainMatrix& m = StainMatrix::hematoxylin_eosin());

}  // namespace wsseg
