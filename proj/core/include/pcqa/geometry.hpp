#ifndef PCQA_GEOMETRY_HPP
#define PCQA_GEOMETRY_HPP

#include <cmath>

namespace pcqa {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? (*this) / n : Vec3{0.0, 0.0, 0.0};
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double squared_distance(const Vec3& a, const Vec3& b) { return (a - b).squared_norm(); }
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

}  // namespace pcqa

#endif  // PCQA_GEOMETRY_HPP
