#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "posebench/dataset.hpp"

namespace posebench {

namespace {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

struct PlyProperty {
  std::string name;
  std::string type;       // scalar type, or the value type for lists
  std::string count_type; // non-empty for list properties
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

size_t scalar_size(const std::string &type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8")
    return 1;
  if (type == "short" || type == "ushort" || type == "int16" ||
      type == "uint16")
    return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64" || type == "int64" ||
      type == "uint64")
    return 8;
  throw ValidationError("PLY: unknown property type '" + type + "'");
}

double read_binary_scalar(std::istream &in, const std::string &type) {
  std::array<char, 8> buf{};
  const size_t n = scalar_size(type);
  if (!in.read(buf.data(), static_cast<std::streamsize>(n))) {
    throw ValidationError("PLY: unexpected end of binary data");
  }
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, buf.data(), 4);
    return v;
  }
  if (type == "double" || type == "float64") {
    double v;
    std::memcpy(&v, buf.data(), 8);
    return v;
  }
  // Integer types; sign handling is irrelevant for coordinate data we keep,
  // but list counts must come out right.
  if (type == "char" || type == "int8") {
    int8_t v;
    std::memcpy(&v, buf.data(), 1);
    return v;
  }
  if (type == "uchar" || type == "uint8") {
    uint8_t v;
    std::memcpy(&v, buf.data(), 1);
    return v;
  }
  if (type == "short" || type == "int16") {
    int16_t v;
    std::memcpy(&v, buf.data(), 2);
    return v;
  }
  if (type == "ushort" || type == "uint16") {
    uint16_t v;
    std::memcpy(&v, buf.data(), 2);
    return v;
  }
  if (type == "int" || type == "int32") {
    int32_t v;
    std::memcpy(&v, buf.data(), 4);
    return v;
  }
  if (type == "uint" || type == "uint32") {
    uint32_t v;
    std::memcpy(&v, buf.data(), 4);
    return v;
  }
  int64_t v;
  std::memcpy(&v, buf.data(), 8);
  return static_cast<double>(v);
}

}  // namespace

std::vector<Eigen::Vector3d> load_ply_vertices(
    const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open PLY file: " + path.string());
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("PLY: empty file: " + path.string());
  }
  // Tolerate trailing \r from CRLF files throughout the header.
  auto strip_cr = [](std::string &s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  strip_cr(line);
  if (line != "ply") {
    throw ValidationError("PLY: missing 'ply' magic in " + path.string());
  }

  PlyFormat format = PlyFormat::kAscii;
  std::vector<PlyElement> elements;
  bool saw_format = false;
  while (std::getline(in, line)) {
    strip_cr(line);
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) {
      continue;
    }
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        format = PlyFormat::kAscii;
      } else if (fmt == "binary_little_endian") {
        format = PlyFormat::kBinaryLittleEndian;
      } else {
        throw ValidationError("PLY: unsupported format '" + fmt + "' in " +
                      path.string());
      }
      saw_format = true;
    } else if (keyword == "element") {
      PlyElement elem;
      ls >> elem.name >> elem.count;
      elements.push_back(elem);
    } else if (keyword == "property") {
      if (elements.empty()) {
        throw ValidationError("PLY: property before any element in " + path.string());
      }
      PlyProperty prop;
      std::string first;
      ls >> first;
      if (first == "list") {
        prop.is_list = true;
        ls >> prop.count_type >> prop.type >> prop.name;
      } else {
        prop.type = first;
        ls >> prop.name;
      }
      elements.back().properties.push_back(prop);
    } else if (keyword == "end_header") {
      break;
    } else {
      throw ValidationError("PLY: unrecognized header line '" + line + "' in " +
                    path.string());
    }
  }
  if (!saw_format) {
    throw ValidationError("PLY: header has no format line in " + path.string());
  }

  std::vector<Eigen::Vector3d> vertices;
  for (const auto &elem : elements) {
    const bool is_vertex = elem.name == "vertex";
    int ix = -1, iy = -1, iz = -1;
    if (is_vertex) {
      for (size_t p = 0; p < elem.properties.size(); ++p) {
        if (elem.properties[p].name == "x") ix = static_cast<int>(p);
        if (elem.properties[p].name == "y") iy = static_cast<int>(p);
        if (elem.properties[p].name == "z") iz = static_cast<int>(p);
      }
      if (ix < 0 || iy < 0 || iz < 0) {
        throw ValidationError("PLY: vertex element lacks x/y/z in " + path.string());
      }
      vertices.reserve(elem.count);
    }

    for (size_t i = 0; i < elem.count; ++i) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      if (format == PlyFormat::kAscii) {
        if (!std::getline(in, line)) {
          throw ValidationError("PLY: truncated data in " + path.string());
        }
        strip_cr(line);
        std::istringstream ls(line);
        for (size_t p = 0; p < elem.properties.size(); ++p) {
          const auto &prop = elem.properties[p];
          if (prop.is_list) {
            size_t n;
            if (!(ls >> n)) throw ValidationError("PLY: bad list count");
            double tmp;
            for (size_t k = 0; k < n; ++k) ls >> tmp;
            continue;
          }
          double value;
          if (!(ls >> value)) {
            throw ValidationError("PLY: malformed " + elem.name + " row " +
                          std::to_string(i) + " in " + path.string());
          }
          if (is_vertex) {
            if (static_cast<int>(p) == ix) v.x() = value;
            if (static_cast<int>(p) == iy) v.y() = value;
            if (static_cast<int>(p) == iz) v.z() = value;
          }
        }
      } else {
        for (size_t p = 0; p < elem.properties.size(); ++p) {
          const auto &prop = elem.properties[p];
          if (prop.is_list) {
            const double n = read_binary_scalar(in, prop.count_type);
            for (size_t k = 0; k < static_cast<size_t>(n); ++k) {
              read_binary_scalar(in, prop.type);
            }
            continue;
          }
          const double value = read_binary_scalar(in, prop.type);
          if (is_vertex) {
            if (static_cast<int>(p) == ix) v.x() = value;
            if (static_cast<int>(p) == iy) v.y() = value;
            if (static_cast<int>(p) == iz) v.z() = value;
          }
        }
      }
      if (is_vertex) {
        vertices.push_back(v);
      }
    }
  }
  return vertices;
}

}  // namespace posebench
