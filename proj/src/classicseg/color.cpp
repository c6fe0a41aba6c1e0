#include "wsseg/classicseg/color.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace wsseg {

namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
}

const std::array<double, 256>& linear_table() {
  static const auto table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[i] = srgb_to_linear(i / 255.0);
    return t;
  }();
  return table;
}

Eigen::Matrix3d to_eigen(const StainMatrix& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = m.rows[i][j];
  return e;
}

Eigen::Matrix3d checked_inverse(const StainMatrix& m) {
  const Eigen::Matrix3d e = to_eigen(m);
  Eigen::Matrix3d inv;
  bool ok = false;
  e.computeInverseWithCheck(inv, ok, 1e-9);
  if (!ok) throw ConfigError("stain matrix is singular");
  return inv;
}

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (n == 0.0) throw ConfigError("stain vector has zero length");
  return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

Vec3 rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const auto& lin = linear_table();
  const double R = lin[r], G = lin[g], B = lin[b];
  const double X = 0.4124564 * R + 0.3575761 * G + 0.1804375 * B;
  const double Y = 0.2126729 * R + 0.7151522 * G + 0.0721750 * B;
  const double Z = 0.0193339 * R + 0.1191920 * G + 0.9503041 * B;
  const double fx = lab_f(X / 0.95047), fy = lab_f(Y), fz = lab_f(Z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

RealRaster rgb_to_lab(const Image& image) {
  if (image.channels != 3) throw DataError("L*a*b* conversion needs an RGB image");
  RealRaster out(image.height, image.width, 3);
  for (std::size_t i = 0; i < image.pixels(); ++i) {
    const Vec3 lab = rgb_to_lab(image.data[3 * i], image.data[3 * i + 1], image.data[3 * i + 2]);
    for (int c = 0; c < 3; ++c) out.data[3 * i + c] = lab[c];
  }
  return out;
}

StainMatrix StainMatrix::from_stains(const Vec3& first, const Vec3& second) {
  StainMatrix m;
  m.rows[0] = normalized(first);
  m.rows[1] = normalized(second);
  const Vec3& a = m.rows[0];
  const Vec3& b = m.rows[1];
  const Vec3 cross{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  if (std::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]) < 1e-9) {
    throw ConfigError("stain vectors are parallel");
  }
  m.rows[2] = normalized(cross);
  return m;
}

StainMatrix StainMatrix::hematoxylin_eosin() {
  return from_stains({0.650, 0.704, 0.286}, {0.072, 0.990, 0.105});
}

Vec3 optical_density(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  auto od = [](std::uint8_t v) { return -std::log10((v + 1.0) / 256.0); };
  return {od(r), od(g), od(b)};
}

Vec3 unmix_stains(const Vec3& od, const StainMatrix& m) {
  // od (row) = c (row) * M, so c = od * M^-1.
  const Eigen::RowVector3d c = Eigen::RowVector3d(od[0], od[1], od[2]) * checked_inverse(m);
  return {c[0], c[1], c[2]};
}

Vec3 remix_stains(const Vec3& concentrations, const StainMatrix& m) {
  Vec3 od{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) od[j] += concentrations[i] * m.rows[i][j];
  return od;
}

StainImages color_deconvolution(const Image& image, const StainMatrix& m) {
  if (image.channels != 3) throw DataError("color deconvolution needs an RGB image");
  const Eigen::Matrix3d inv = checked_inverse(m);
  StainImages out{RealRaster(image.height, image.width, 1), RealRaster(image.height, image.width, 1), m};
  std::array<double, 256> od_table{};
  for (int v = 0; v < 256; ++v) od_table[v] = -std::log10((v + 1.0) / 256.0);
  for (std::size_t i = 0; i < image.pixels(); ++i) {
    const Eigen::RowVector3d od(od_table[image.data[3 * i]], od_table[image.data[3 * i + 1]],
                                od_table[image.data[3 * i + 2]]);
    const Eigen::RowVector3d c = od * inv;
    out.hematoxylin.data[i] = std::max(0.0, c[0]);
    out.eosin.data[i] = std::max(0.0, c[1]);
  }
  return out;
}

}  // namespace wsseg
