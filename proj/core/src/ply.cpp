#include "pcqa/ply.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "pcqa/error.hpp"

namespace pcqa {

namespace {

enum class PropType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

size_t prop_size(PropType t) {
  switch (t) {
    case PropType::Int8:
    case PropType::UInt8: return 1;
    case PropType::Int16:
    case PropType::UInt16: return 2;
    case PropType::Int32:
    case PropType::UInt32:
    case PropType::Float32: return 4;
    case PropType::Float64: return 8;
  }
  return 0;
}

bool parse_prop_type(const std::string& token, PropType& out) {
  if (token == "char" || token == "int8") out = PropType::Int8;
  else if (token == "uchar" || token == "uint8") out = PropType::UInt8;
  else if (token == "short" || token == "int16") out = PropType::Int16;
  else if (token == "ushort" || token == "uint16") out = PropType::UInt16;
  else if (token == "int" || token == "int32") out = PropType::Int32;
  else if (token == "uint" || token == "uint32") out = PropType::UInt32;
  else if (token == "float" || token == "float32") out = PropType::Float32;
  else if (token == "double" || token == "float64") out = PropType::Float64;
  else return false;
  return true;
}

struct Property {
  std::string name;
  PropType type = PropType::Float32;
  bool is_list = false;
  PropType list_count_type = PropType::UInt8;
};

struct Element {
  std::string name;
  size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  PlyFormat format = PlyFormat::Ascii;
  std::vector<Element> elements;
  size_t body_offset = 0;  // byte offset just past "end_header\n"
};

// Fetches the next header line, tolerating CRLF.
bool next_line(std::string_view bytes, size_t& pos, std::string& line) {
  if (pos >= bytes.size()) return false;
  size_t nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) {
    line.assign(bytes.substr(pos));
    pos = bytes.size();
  } else {
    line.assign(bytes.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

Header parse_header(std::string_view bytes) {
  Header header;
  size_t pos = 0;
  std::string line;
  if (!next_line(bytes, pos, line) || line != "ply")
    throw Error(ErrorCode::MalformedHeader, "missing 'ply' magic");

  bool saw_format = false;
  bool saw_end = false;
  while (next_line(bytes, pos, line)) {
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string& kw = tokens[0];
    if (kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      if (tokens.size() != 3)
        throw Error(ErrorCode::MalformedHeader, "bad format line: " + line);
      if (tokens[2] != "1.0")
        throw Error(ErrorCode::UnsupportedFormat, "PLY version " + tokens[2]);
      if (tokens[1] == "ascii") header.format = PlyFormat::Ascii;
      else if (tokens[1] == "binary_little_endian") header.format = PlyFormat::BinaryLittleEndian;
      else if (tokens[1] == "binary_big_endian")
        throw Error(ErrorCode::UnsupportedFormat, "big-endian PLY not supported");
      else
        throw Error(ErrorCode::MalformedHeader, "unknown format: " + tokens[1]);
      saw_format = true;
    } else if (kw == "element") {
      if (tokens.size() != 3)
        throw Error(ErrorCode::MalformedHeader, "bad element line: " + line);
      Element el;
      el.name = tokens[1];
      size_t count = 0;
      auto [p, ec] = std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), count);
      if (ec != std::errc() || p != tokens[2].data() + tokens[2].size())
        throw Error(ErrorCode::MalformedHeader, "bad element count: " + tokens[2]);
      el.count = count;
      header.elements.push_back(std::move(el));
    } else if (kw == "property") {
      if (header.elements.empty())
        throw Error(ErrorCode::MalformedHeader, "property before any element");
      Property prop;
      if (tokens.size() == 5 && tokens[1] == "list") {
        prop.is_list = true;
        if (!parse_prop_type(tokens[2], prop.list_count_type) ||
            !parse_prop_type(tokens[3], prop.type))
          throw Error(ErrorCode::MalformedHeader, "bad list property: " + line);
        prop.name = tokens[4];
      } else if (tokens.size() == 3) {
        if (!parse_prop_type(tokens[1], prop.type))
          throw Error(ErrorCode::MalformedHeader, "unknown property type: " + tokens[1]);
        prop.name = tokens[2];
      } else {
        throw Error(ErrorCode::MalformedHeader, "bad property line: " + line);
      }
      header.elements.back().properties.push_back(std::move(prop));
    } else if (kw == "end_header") {
      saw_end = true;
      header.body_offset = pos;
      break;
    } else {
      throw Error(ErrorCode::MalformedHeader, "unexpected header keyword: " + kw);
    }
  }
  if (!saw_end) throw Error(ErrorCode::MalformedHeader, "missing end_header");
  if (!saw_format) throw Error(ErrorCode::MalformedHeader, "missing format line");
  return header;
}

double read_scalar_le(const unsigned char* p, PropType t) {
  switch (t) {
    case PropType::Int8: return static_cast<double>(static_cast<int8_t>(p[0]));
    case PropType::UInt8: return static_cast<double>(p[0]);
    case PropType::Int16: {
      uint16_t u = static_cast<uint16_t>(p[0] | (p[1] << 8));
      int16_t v;
      std::memcpy(&v, &u, 2);
      return v;
    }
    case PropType::UInt16: return static_cast<double>(p[0] | (p[1] << 8));
    case PropType::Int32: {
      uint32_t u = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                   (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
      int32_t v;
      std::memcpy(&v, &u, 4);
      return v;
    }
    case PropType::UInt32: {
      uint32_t u = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                   (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
      return static_cast<double>(u);
    }
    case PropType::Float32: {
      uint32_t u = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                   (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
      float f;
      std::memcpy(&f, &u, 4);
      return static_cast<double>(f);
    }
    case PropType::Float64: {
      uint64_t u = 0;
      for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
      double d;
      std::memcpy(&d, &u, 8);
      return d;
    }
  }
  return 0.0;
}

// Column roles within the vertex element.
struct VertexLayout {
  int x = -1, y = -1, z = -1;
  int red = -1, green = -1, blue = -1;
  int nx = -1, ny = -1, nz = -1;
};

VertexLayout map_vertex_properties(const Element& vertex) {
  VertexLayout layout;
  for (size_t i = 0; i < vertex.properties.size(); ++i) {
    const Property& prop = vertex.properties[i];
    if (prop.is_list) continue;
    int idx = static_cast<int>(i);
    bool is_float = prop.type == PropType::Float32 || prop.type == PropType::Float64;
    bool is_u8 = prop.type == PropType::UInt8;
    if (prop.name == "x" && is_float) layout.x = idx;
    else if (prop.name == "y" && is_float) layout.y = idx;
    else if (prop.name == "z" && is_float) layout.z = idx;
    else if (prop.name == "red" && is_u8) layout.red = idx;
    else if (prop.name == "green" && is_u8) layout.green = idx;
    else if (prop.name == "blue" && is_u8) layout.blue = idx;
    else if (prop.name == "nx" && is_float) layout.nx = idx;
    else if (prop.name == "ny" && is_float) layout.ny = idx;
    else if (prop.name == "nz" && is_float) layout.nz = idx;
  }
  if (layout.x < 0 || layout.y < 0 || layout.z < 0)
    throw Error(ErrorCode::MalformedHeader, "vertex element lacks float x,y,z");
  return layout;
}

}  // namespace

PointCloud parse_ply(std::string_view bytes) {
  Header header = parse_header(bytes);

  const Element* vertex = nullptr;
  size_t vertex_index = 0;
  for (size_t i = 0; i < header.elements.size(); ++i) {
    if (header.elements[i].name == "vertex") {
      vertex = &header.elements[i];
      vertex_index = i;
      break;
    }
  }
  if (!vertex) throw Error(ErrorCode::MalformedHeader, "no vertex element declared");
  if (vertex->count == 0)
    throw Error(ErrorCode::MalformedHeader, "vertex element declares 0 vertices");

  VertexLayout layout = map_vertex_properties(*vertex);
  bool with_color = layout.red >= 0 && layout.green >= 0 && layout.blue >= 0;
  bool with_normal = layout.nx >= 0 && layout.ny >= 0 && layout.nz >= 0;

  PointCloud cloud;
  cloud.positions.reserve(vertex->count);
  if (with_color) cloud.colors.reserve(vertex->count);
  if (with_normal) cloud.normals.reserve(vertex->count);

  size_t nprops = vertex->properties.size();
  std::vector<double> row(nprops, 0.0);

  if (header.format == PlyFormat::Ascii) {
    size_t pos = header.body_offset;
    std::string line;
    // skip elements declared before vertex
    for (size_t e = 0; e < vertex_index; ++e) {
      for (size_t r = 0; r < header.elements[e].count; ++r) {
        if (!next_line(bytes, pos, line))
          throw Error(ErrorCode::TruncatedBody, "missing rows for element " + header.elements[e].name);
      }
    }
    for (size_t v = 0; v < vertex->count; ++v) {
      do {
        if (!next_line(bytes, pos, line))
          throw Error(ErrorCode::TruncatedBody, "expected " + std::to_string(vertex->count) +
                                                    " vertices, got " + std::to_string(v));
      } while (line.find_first_not_of(" \t") == std::string::npos);
      auto tokens = split_ws(line);
      size_t t = 0;
      for (size_t pi = 0; pi < nprops; ++pi) {
        const Property& prop = vertex->properties[pi];
        if (prop.is_list) {
          if (t >= tokens.size()) throw Error(ErrorCode::TruncatedBody, "short vertex row");
          long count = std::strtol(tokens[t++].c_str(), nullptr, 10);
          t += static_cast<size_t>(count < 0 ? 0 : count);
          row[pi] = 0.0;
          continue;
        }
        if (t >= tokens.size()) throw Error(ErrorCode::TruncatedBody, "short vertex row");
        const std::string& tok = tokens[t++];
        char* end = nullptr;
        row[pi] = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str())
          throw Error(ErrorCode::TruncatedBody, "unparsable vertex value: " + tok);
      }
      cloud.positions.push_back({row[layout.x], row[layout.y], row[layout.z]});
      if (with_color)
        cloud.colors.push_back({static_cast<uint8_t>(row[layout.red]),
                                static_cast<uint8_t>(row[layout.green]),
                                static_cast<uint8_t>(row[layout.blue])});
      if (with_normal)
        cloud.normals.push_back(
            Vec3{row[layout.nx], row[layout.ny], row[layout.nz]}.normalized());
    }
  } else {
    const unsigned char* base = reinterpret_cast<const unsigned char*>(bytes.data());
    size_t pos = header.body_offset;
    size_t end = bytes.size();
    // skip fixed-size elements before vertex
    for (size_t e = 0; e < vertex_index; ++e) {
      size_t stride = 0;
      for (const Property& prop : header.elements[e].properties) {
        if (prop.is_list)
          throw Error(ErrorCode::UnsupportedFormat,
                      "binary list property before vertex element");
        stride += prop_size(prop.type);
      }
      pos += stride * header.elements[e].count;
    }
    for (size_t v = 0; v < vertex->count; ++v) {
      for (size_t pi = 0; pi < nprops; ++pi) {
        const Property& prop = vertex->properties[pi];
        if (prop.is_list) {
          size_t csz = prop_size(prop.list_count_type);
          if (pos + csz > end) throw Error(ErrorCode::TruncatedBody, "truncated list count");
          double count = read_scalar_le(base + pos, prop.list_count_type);
          pos += csz;
          pos += static_cast<size_t>(count) * prop_size(prop.type);
          if (pos > end) throw Error(ErrorCode::TruncatedBody, "truncated list body");
          row[pi] = 0.0;
          continue;
        }
        size_t sz = prop_size(prop.type);
        if (pos + sz > end)
          throw Error(ErrorCode::TruncatedBody,
                      "expected " + std::to_string(vertex->count) + " vertices, got " +
                          std::to_string(v));
        row[pi] = read_scalar_le(base + pos, prop.type);
        pos += sz;
      }
      cloud.positions.push_back({row[layout.x], row[layout.y], row[layout.z]});
      if (with_color)
        cloud.colors.push_back({static_cast<uint8_t>(row[layout.red]),
                                static_cast<uint8_t>(row[layout.green]),
                                static_cast<uint8_t>(row[layout.blue])});
      if (with_normal)
        cloud.normals.push_back(
            Vec3{row[layout.nx], row[layout.ny], row[layout.nz]}.normalized());
    }
  }
  return cloud;
}

namespace {

void append_f64_le(std::string& out, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

// shortest decimal form that parses back to the same double, so the ascii
// round trip loses nothing while staying readable
std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

std::string write_ply(const PointCloud& cloud, PlyFormat format) {
  cloud.validate();
  std::string out;
  out += "ply\n";
  out += format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  const char* coord_type = "double";
  out += std::string("property ") + coord_type + " x\n";
  out += std::string("property ") + coord_type + " y\n";
  out += std::string("property ") + coord_type + " z\n";
  if (cloud.has_colors()) {
    out += "property uchar red\n";
    out += "property uchar green\n";
    out += "property uchar blue\n";
  }
  if (cloud.has_normals()) {
    out += std::string("property ") + coord_type + " nx\n";
    out += std::string("property ") + coord_type + " ny\n";
    out += std::string("property ") + coord_type + " nz\n";
  }
  out += "end_header\n";

  for (size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    if (format == PlyFormat::Ascii) {
      out += format_real(p.x) + " " + format_real(p.y) + " " + format_real(p.z);
      if (cloud.has_colors()) {
        const Rgb8& c = cloud.colors[i];
        out += " " + std::to_string(c[0]) + " " + std::to_string(c[1]) + " " +
               std::to_string(c[2]);
      }
      if (cloud.has_normals()) {
        const Vec3& n = cloud.normals[i];
        out += " " + format_real(n.x) + " " + format_real(n.y) + " " + format_real(n.z);
      }
      out += "\n";
    } else {
      append_f64_le(out, p.x);
      append_f64_le(out, p.y);
      append_f64_le(out, p.z);
      if (cloud.has_colors()) {
        const Rgb8& c = cloud.colors[i];
        out.push_back(static_cast<char>(c[0]));
        out.push_back(static_cast<char>(c[1]));
        out.push_back(static_cast<char>(c[2]));
      }
      if (cloud.has_normals()) {
        const Vec3& n = cloud.normals[i];
        append_f64_le(out, n.x);
        append_f64_le(out, n.y);
        append_f64_le(out, n.z);
      }
    }
  }
  return out;
}

PointCloud read_ply_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  PointCloud cloud = parse_ply(bytes);
  if (cloud.name.empty()) {
    size_t slash = path.find_last_of("/\\");
    cloud.name = slash == std::string::npos ? path : path.substr(slash + 1);
  }
  return cloud;
}

void write_ply_file(const std::string& path, const PointCloud& cloud, PlyFormat format) {
  std::string bytes = write_ply(cloud, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace pcqa
