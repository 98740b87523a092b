#ifndef PCQA_PLY_HPP
#define PCQA_PLY_HPP

#include <string>
#include <string_view>

#include "pcqa/point_cloud.hpp"

namespace pcqa {

enum class PlyFormat { Ascii, BinaryLittleEndian };

// Parses a PLY byte buffer (format ascii 1.0 or binary_little_endian 1.0).
// The vertex element must declare float/double x,y,z; optional uchar
// red/green/blue and float nx/ny/nz are picked up, everything else is
// skipped. Property order in the header is honored. Normals are
// renormalized on load so the PointCloud invariant holds.
//
// Throws Error with MalformedHeader / UnsupportedFormat / TruncatedBody.
PointCloud parse_ply(std::string_view bytes);

// Serializes a cloud. Both modes round-trip positions bit-exactly (ascii uses
// shortest-round-trip decimals). Colors are exact in both.
std::string write_ply(const PointCloud& cloud, PlyFormat format);

PointCloud read_ply_file(const std::string& path);
void write_ply_file(const std::string& path, const PointCloud& cloud, PlyFormat format);

}  // namespace pcqa

#endif  // PCQA_PLY_HPP
