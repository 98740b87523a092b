#include "pcqa/color.hpp"

#include <cmath>

namespace pcqa {

namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  constexpr double kDelta3 = kDelta * kDelta * kDelta;
  return t > kDelta3 ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

Lab rgb_to_lab(uint8_t r8, uint8_t g8, uint8_t b8) {
  double r = srgb_to_linear(r8 / 255.0);
  double g = srgb_to_linear(g8 / 255.0);
  double b = srgb_to_linear(b8 / 255.0);

  // linear sRGB -> XYZ, D65
  double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
  double fx = lab_f(x / kXn);
  double fy = lab_f(y / kYn);
  double fz = lab_f(z / kZn);

  Lab lab;
  lab.l = 116.0 * fy - 16.0;
  lab.a = 500.0 * (fx - fy);
  lab.b = 200.0 * (fy - fz);
  return lab;
}

Lab rgb_to_lab(const std::array<uint8_t, 3>& rgb) { return rgb_to_lab(rgb[0], rgb[1], rgb[2]); }

}  // namespace pcqa
