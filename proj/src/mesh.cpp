#include "meshplace/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "meshplace/error.hpp"
#include "meshplace/image.hpp"

namespace meshplace {

namespace {

[[noreturn]] void format_error(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::kFormat, what + " (byte offset " + std::to_string(offset) + ")");
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Splits a line into whitespace-separated tokens, remembering offsets.
struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view line, std::size_t base) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), base + start});
  }
  return out;
}

double parse_double(const Token& t) {
  double value = 0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    format_error(t.offset, "expected a number, got '" + std::string(t.text) + "'");
  }
  return value;
}

long long parse_integer(const Token& t) {
  long long value = 0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    format_error(t.offset, "expected an integer, got '" + std::string(t.text) + "'");
  }
  return value;
}

void add_fan(TriangleMesh& mesh, const std::vector<int>& polygon) {
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
    mesh.triangles.push_back({polygon[0], polygon[i], polygon[i + 1]});
  }
}

TriangleMesh parse_obj(std::string_view bytes) {
  TriangleMesh mesh;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    const std::string_view line = bytes.substr(pos, end - pos);
    const auto tokens = tokenize(line, pos);
    if (!tokens.empty() && tokens[0].text[0] != '#') {
      if (tokens[0].text == "v") {
        if (tokens.size() < 4) format_error(tokens[0].offset, "vertex record needs 3 coordinates");
        mesh.vertices.emplace_back(parse_double(tokens[1]), parse_double(tokens[2]),
                                   parse_double(tokens[3]));
      } else if (tokens[0].text == "f") {
        if (tokens.size() < 4) format_error(tokens[0].offset, "face record needs >= 3 vertices");
        std::vector<int> polygon;
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          // v, v/vt, v//vn, v/vt/vn: only the position index matters.
          Token idx = tokens[i];
          idx.text = idx.text.substr(0, idx.text.find('/'));
          long long k = parse_integer(idx);
          const auto n = static_cast<long long>(mesh.vertices.size());
          if (k < 0) k = n + k + 1;
          if (k < 1 || k > n) format_error(idx.offset, "face index out of range");
          polygon.push_back(static_cast<int>(k - 1));
        }
        add_fan(mesh, polygon);
      }
      // vt, vn, g, o, s, usemtl, mtllib: ignored.
    }
    pos = end + 1;
  }
  return mesh;
}

enum class PlyScalar { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

std::optional<PlyScalar> ply_scalar(std::string_view name) {
  if (name == "char" || name == "int8") return PlyScalar::kInt8;
  if (name == "uchar" || name == "uint8") return PlyScalar::kUint8;
  if (name == "short" || name == "int16") return PlyScalar::kInt16;
  if (name == "ushort" || name == "uint16") return PlyScalar::kUint16;
  if (name == "int" || name == "int32") return PlyScalar::kInt32;
  if (name == "uint" || name == "uint32") return PlyScalar::kUint32;
  if (name == "float" || name == "float32") return PlyScalar::kFloat32;
  if (name == "double" || name == "float64") return PlyScalar::kFloat64;
  return std::nullopt;
}

std::size_t scalar_size(PlyScalar s) {
  switch (s) {
    case PlyScalar::kInt8: case PlyScalar::kUint8: return 1;
    case PlyScalar::kInt16: case PlyScalar::kUint16: return 2;
    case PlyScalar::kInt32: case PlyScalar::kUint32: case PlyScalar::kFloat32: return 4;
    case PlyScalar::kFloat64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyScalar type = PlyScalar::kFloat32;
  bool is_list = false;
  PlyScalar count_type = PlyScalar::kUint8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

// Reads values either from ascii tokens or little-endian binary.
class PlyReader {
 public:
  PlyReader(std::string_view body, std::size_t base, bool binary)
      : body_(body), base_(base), binary_(binary) {}

  double read(PlyScalar type) {
    if (binary_) return read_binary(type);
    return read_ascii();
  }

  // ASCII elements are one per line; resync after each element.
  void end_element() {
    if (binary_) return;
    while (pos_ < body_.size() && body_[pos_] != '\n') {
      if (!is_space(body_[pos_])) format_error(base_ + pos_, "unexpected extra data in element");
      ++pos_;
    }
    if (pos_ < body_.size()) ++pos_;
  }

  std::size_t offset() const { return base_ + pos_; }

 private:
  double read_ascii() {
    while (pos_ < body_.size() && (is_space(body_[pos_]) || body_[pos_] == '\n')) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < body_.size() && !is_space(body_[pos_]) && body_[pos_] != '\n') ++pos_;
    if (pos_ == start) format_error(base_ + start, "unexpected end of PLY data");
    return parse_double({body_.substr(start, pos_ - start), base_ + start});
  }

  double read_binary(PlyScalar type) {
    const std::size_t n = scalar_size(type);
    if (pos_ + n > body_.size()) format_error(base_ + pos_, "unexpected end of PLY data");
    const char* p = body_.data() + pos_;
    pos_ += n;
    switch (type) {
      case PlyScalar::kInt8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
      case PlyScalar::kUint8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
      case PlyScalar::kInt16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
      case PlyScalar::kUint16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
      case PlyScalar::kInt32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
      case PlyScalar::kUint32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
      case PlyScalar::kFloat32: { float v; std::memcpy(&v, p, 4); return v; }
      case PlyScalar::kFloat64: { double v; std::memcpy(&v, p, 8); return v; }
    }
    return 0;
  }

  std::string_view body_;
  std::size_t base_;
  bool binary_;
  std::size_t pos_ = 0;
};

TriangleMesh parse_ply(std::string_view bytes) {
  if (bytes.substr(0, 3) != "ply") format_error(0, "missing 'ply' magic");
  std::vector<PlyElement> elements;
  bool binary = false;
  bool have_format = false;
  std::size_t pos = 0;
  std::size_t body_start = std::string_view::npos;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) format_error(pos, "unterminated PLY header");
    const auto tokens = tokenize(bytes.substr(pos, end - pos), pos);
    const std::size_t line_offset = pos;
    pos = end + 1;
    if (tokens.empty()) continue;
    const auto key = tokens[0].text;
    if (key == "end_header") {
      body_start = pos;
      break;
    }
    if (key == "ply" || key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      if (tokens.size() < 2) format_error(line_offset, "malformed format line");
      if (tokens[1].text == "ascii") {
        binary = false;
      } else if (tokens[1].text == "binary_little_endian") {
        binary = true;
      } else {
        format_error(tokens[1].offset, "unsupported PLY format '" + std::string(tokens[1].text) + "'");
      }
      have_format = true;
    } else if (key == "element") {
      if (tokens.size() != 3) format_error(line_offset, "malformed element line");
      const long long count = parse_integer(tokens[2]);
      if (count < 0) format_error(tokens[2].offset, "negative element count");
      elements.push_back({std::string(tokens[1].text), static_cast<std::size_t>(count), {}});
    } else if (key == "property") {
      if (elements.empty()) format_error(line_offset, "property before any element");
      PlyProperty prop;
      if (tokens.size() >= 2 && tokens[1].text == "list") {
        if (tokens.size() != 5) format_error(line_offset, "malformed list property");
        auto ct = ply_scalar(tokens[2].text);
        auto it = ply_scalar(tokens[3].text);
        if (!ct || !it) format_error(tokens[2].offset, "unknown list property type");
        prop = {std::string(tokens[4].text), *it, true, *ct};
      } else {
        if (tokens.size() != 3) format_error(line_offset, "malformed property line");
        auto t = ply_scalar(tokens[1].text);
        if (!t) format_error(tokens[1].offset, "unknown property type");
        prop = {std::string(tokens[2].text), *t, false, PlyScalar::kUint8};
      }
      elements.back().properties.push_back(prop);
    } else {
      format_error(line_offset, "unknown header keyword '" + std::string(key) + "'");
    }
  }
  if (body_start == std::string_view::npos) format_error(bytes.size(), "missing end_header");
  if (!have_format) format_error(0, "missing format line");

  TriangleMesh mesh;
  PlyReader reader(bytes.substr(body_start), body_start, binary);
  bool have_albedo = false;
  for (const auto& element : elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    if (is_vertex) {
      for (const auto& p : element.properties) {
        if (p.name == "red" || p.name == "albedo" || p.name == "intensity") have_albedo = true;
      }
    }
    for (std::size_t i = 0; i < element.count; ++i) {
      Vec3 xyz = Vec3::Zero();
      double rgb[3] = {-1, -1, -1};
      double albedo = -1;
      for (const auto& p : element.properties) {
        if (p.is_list) {
          const double n = reader.read(p.count_type);
          if (n < 0 || n != std::floor(n)) format_error(reader.offset(), "bad list length");
          std::vector<int> polygon;
          for (int k = 0; k < static_cast<int>(n); ++k) {
            const double idx = reader.read(p.type);
            polygon.push_back(static_cast<int>(idx));
          }
          if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            if (polygon.size() < 3) format_error(reader.offset(), "face with fewer than 3 vertices");
            for (int idx : polygon) {
              if (idx < 0) format_error(reader.offset(), "negative face index");
            }
            add_fan(mesh, polygon);
          }
          continue;
        }
        const double value = reader.read(p.type);
        if (!is_vertex) continue;
        if (p.name == "x") xyz.x() = value;
        else if (p.name == "y") xyz.y() = value;
        else if (p.name == "z") xyz.z() = value;
        else if (p.name == "red") rgb[0] = value;
        else if (p.name == "green") rgb[1] = value;
        else if (p.name == "blue") rgb[2] = value;
        else if (p.name == "albedo" || p.name == "intensity") albedo = value;
      }
      reader.end_element();
      if (is_vertex) {
        mesh.vertices.push_back(xyz);
        if (have_albedo) {
          float a = 1.0f;
          if (albedo >= 0) {
            a = static_cast<float>(albedo);
          } else if (rgb[0] >= 0) {
            const auto ch = [&](int c) {
              return static_cast<std::uint8_t>(std::clamp(rgb[c] < 0 ? rgb[0] : rgb[c], 0.0, 255.0));
            };
            const auto r = ch(0), g = ch(1), b = ch(2);
            a = (r == g && g == b) ? static_cast<float>(r / 255.0) : luminance(r, g, b);
          }
          mesh.albedo.push_back(std::clamp(a, 0.0f, 1.0f));
        }
      }
    }
  }
  for (const auto& tri : mesh.triangles) {
    for (int idx : tri) {
      if (idx >= static_cast<int>(mesh.vertices.size())) {
        format_error(body_start, "face index out of range");
      }
    }
  }
  return mesh;
}

}  // namespace

AxisAlignedBox bounding_box(const TriangleMesh& mesh) {
  AxisAlignedBox box{Vec3::Constant(std::numeric_limits<double>::infinity()),
                     Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& v : mesh.vertices) {
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

TriangleMesh normalize_to_canonical(TriangleMesh mesh) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::kEmptyGeometry, "mesh has no vertices");
  const auto box = bounding_box(mesh);
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0) || !std::isfinite(extent)) {
    throw Error(ErrorCode::kEmptyGeometry, "mesh has zero extent");
  }
  const Vec3 center = box.center();
  for (auto& v : mesh.vertices) v = (v - center) / extent;
  return mesh;
}

std::size_t remove_degenerate_triangles(TriangleMesh& mesh, double min_area) {
  const auto before = mesh.triangles.size();
  std::erase_if(mesh.triangles, [&](const std::array<int, 3>& t) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    return !(0.5 * n.norm() > min_area);
  });
  return before - mesh.triangles.size();
}

TriangleMesh parse_mesh(std::string_view bytes, MeshFormat format) {
  return format == MeshFormat::kObj ? parse_obj(bytes) : parse_ply(bytes);
}

TriangleMesh load_mesh(std::string_view bytes, MeshFormat format) {
  TriangleMesh mesh = parse_mesh(bytes, format);
  if (mesh.triangles.empty()) throw Error(ErrorCode::kEmptyGeometry, "mesh has no triangles");
  mesh = normalize_to_canonical(std::move(mesh));
  remove_degenerate_triangles(mesh);
  if (mesh.triangles.empty()) throw Error(ErrorCode::kEmptyGeometry, "mesh has only degenerate triangles");
  return mesh;
}

TriangleMesh load_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open mesh file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  MeshFormat format;
  if (ext == ".obj") {
    format = MeshFormat::kObj;
  } else if (ext == ".ply") {
    format = MeshFormat::kPly;
  } else {
    throw Error(ErrorCode::kFormat, "unknown mesh extension '" + ext + "' for " + path.string());
  }
  try {
    return load_mesh(buffer.str(), format);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_ply(const TriangleMesh& mesh, std::ostream& out) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  const bool color = !mesh.albedo.empty();
  if (color) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    out << v.x() << ' ' << v.y() << ' ' << v.z();
    if (color) {
      const int g = static_cast<int>(std::lround(std::clamp(mesh.albedo[i], 0.0f, 1.0f) * 255.0f));
      out << ' ' << g << ' ' << g << ' ' << g;
    }
    out << '\n';
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

TriangleMesh merge(const std::vector<TriangleMesh>& parts) {
  TriangleMesh out;
  const bool any_albedo =
      std::any_of(parts.begin(), parts.end(), [](const TriangleMesh& m) { return !m.albedo.empty(); });
  for (const auto& part : parts) {
    const int base = static_cast<int>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
    for (const auto& t : part.triangles) out.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    if (any_albedo) {
      for (std::size_t i = 0; i < part.vertices.size(); ++i) {
        out.albedo.push_back(part.albedo.empty() ? 1.0f : part.albedo[i]);
      }
    }
  }
  return out;
}

}  // namespace meshplace
