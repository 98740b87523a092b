#ifndef PCQA_COLOR_HPP
#define PCQA_COLOR_HPP

#include <array>
#include <cstdint>

namespace pcqa {

struct Lab {
  double l = 0.0;  // lightness, [0, 100]
  double a = 0.0;
  double b = 0.0;
};

// sRGB (8-bit, D65) -> CIELAB.
Lab rgb_to_lab(uint8_t r, uint8_t g, uint8_t b);
Lab rgb_to_lab(const std::array<uint8_t, 3>& rgb);

}  // namespace pcqa

#endif  // PCQA_COLOR_HPP
