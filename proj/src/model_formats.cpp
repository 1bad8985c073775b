#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "thinsheet/errors.hpp"
#include "thinsheet/point_cloud.hpp"

namespace thinsheet {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

MaterialPoint checked_point(std::size_t line, double x, double y, double z, double e) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
    throw ValidationError("line " + std::to_string(line) + ": non-finite position");
  if (!(e > 0.0) || !std::isfinite(e))
    throw ValidationError("line " + std::to_string(line) + ": elastic modulus must be positive");
  return {Eigen::Vector3d(x, y, z), e};
}

std::vector<MaterialPoint> read_csv(std::istream& in) {
  std::vector<MaterialPoint> points;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;

    std::array<double, 4> values{};
    std::size_t field = 0;
    while (true) {
      const auto comma = text.find(',');
      const auto token = text.substr(0, comma);
      if (field >= values.size()) throw ParseError(line, "expected 4 fields x,y,z,E");
      const auto value = parse_double(token);
      if (!value) throw ParseError(line, "invalid number '" + std::string(trim(token)) + "'");
      values[field++] = *value;
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
    if (field != values.size()) throw ParseError(line, "expected 4 fields x,y,z,E");
    points.push_back(checked_point(line, values[0], values[1], values[2], values[3]));
  }
  return points;
}

// --- PLY -------------------------------------------------------------------

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  std::optional<PlyType> list_count;  // set for list properties
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

template <typename T>
T load_le(const char* bytes) {
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  return value;
}

double decode(PlyType t, const char* b) {
  switch (t) {
    case PlyType::i8: return load_le<std::int8_t>(b);
    case PlyType::u8: return load_le<std::uint8_t>(b);
    case PlyType::i16: return load_le<std::int16_t>(b);
    case PlyType::u16: return load_le<std::uint16_t>(b);
    case PlyType::i32: return load_le<std::int32_t>(b);
    case PlyType::u32: return load_le<std::uint32_t>(b);
    case PlyType::f32: return load_le<float>(b);
    case PlyType::f64: return load_le<double>(b);
  }
  return 0.0;
}

double read_binary(std::istream& in, PlyType t, std::size_t record) {
  char buffer[8];
  if (!in.read(buffer, static_cast<std::streamsize>(ply_size(t))))
    throw ParseError(0, "truncated binary PLY body at record " + std::to_string(record));
  return decode(t, buffer);
}

struct VertexColumns {
  std::size_t x, y, z, stiffness;
};

VertexColumns vertex_columns(const PlyElement& vertex) {
  auto find = [&](std::string_view name) {
    for (std::size_t i = 0; i < vertex.properties.size(); ++i)
      if (vertex.properties[i].name == name) {
        if (vertex.properties[i].list_count) throw ParseError(0, "vertex property '" + std::string(name) + "' is a list");
        return i;
      }
    throw ParseError(0, "vertex element lacks property '" + std::string(name) + "'");
  };
  return {find("x"), find("y"), find("z"), find("stiffness")};
}

std::vector<MaterialPoint> read_ply(std::istream& in) {
  std::string raw;
  std::size_t line = 0;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, raw)) throw ParseError(line, "unexpected end of PLY header");
    ++line;
    return trim(raw);
  };

  if (next_line() != "ply") throw ParseError(line, "missing 'ply' magic");

  bool binary = false;
  std::vector<PlyElement> elements;
  for (;;) {
    std::istringstream words{std::string(next_line())};
    std::string keyword;
    words >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string kind;
      words >> kind;
      if (kind == "ascii") binary = false;
      else if (kind == "binary_little_endian") binary = true;
      else throw ParseError(line, "unsupported PLY format '" + kind + "'");
    } else if (keyword == "element") {
      PlyElement element;
      if (!(words >> element.name >> element.count)) throw ParseError(line, "malformed element line");
      elements.push_back(std::move(element));
    } else if (keyword == "property") {
      if (elements.empty()) throw ParseError(line, "property before any element");
      std::string type_name;
      words >> type_name;
      PlyProperty property;
      if (type_name == "list") {
        std::string count_type, item_type;
        words >> count_type >> item_type >> property.name;
        const auto ct = ply_type(count_type);
        const auto it = ply_type(item_type);
        if (!ct || !it || property.name.empty()) throw ParseError(line, "malformed list property");
        property.list_count = ct;
        property.type = *it;
      } else {
        const auto t = ply_type(type_name);
        words >> property.name;
        if (!t || property.name.empty()) throw ParseError(line, "malformed property line");
        property.type = *t;
      }
      elements.back().properties.push_back(std::move(property));
    } else {
      throw ParseError(line, "unknown header keyword '" + keyword + "'");
    }
  }

  std::vector<MaterialPoint> points;
  for (const auto& element : elements) {
    const bool is_vertex = element.name == "vertex";
    std::optional<VertexColumns> columns;
    if (is_vertex) {
      try {
        columns = vertex_columns(element);
      } catch (const ParseError& e) {
        throw ParseError(line, e.what());
      }
      points.reserve(element.count);
    }

    std::vector<double> values(element.properties.size());
    for (std::size_t record = 0; record < element.count; ++record) {
      if (binary) {
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const auto& property = element.properties[p];
          if (property.list_count) {
            const auto n = static_cast<std::size_t>(read_binary(in, *property.list_count, record));
            for (std::size_t k = 0; k < n; ++k) read_binary(in, property.type, record);
          } else {
            values[p] = read_binary(in, property.type, record);
          }
        }
      } else {
        std::istringstream tokens{std::string(next_line())};
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const auto& property = element.properties[p];
          std::string token;
          if (property.list_count) {
            if (!(tokens >> token)) throw ParseError(line, "missing list count");
            const auto n = parse_double(token);
            if (!n || *n < 0) throw ParseError(line, "invalid list count");
            for (std::size_t k = 0; k < static_cast<std::size_t>(*n); ++k)
              if (!(tokens >> token)) throw ParseError(line, "truncated list");
            continue;
          }
          if (!(tokens >> token)) throw ParseError(line, "expected " + std::to_string(element.properties.size()) + " values");
          const auto v = parse_double(token);
          if (!v) throw ParseError(line, "invalid number '" + token + "'");
          values[p] = *v;
        }
      }
      if (is_vertex) {
        const std::size_t where = binary ? record + 1 : line;
        points.push_back(checked_point(where, values[columns->x], values[columns->y], values[columns->z],
                                       values[columns->stiffness]));
      }
    }
    if (is_vertex) return points;
  }
  throw ParseError(line, "PLY file has no vertex element");
}

}  // namespace

PointCloudModel load_model(std::istream& in, ModelFormat format, double voxel_size) {
  auto points = format == ModelFormat::ply ? read_ply(in) : read_csv(in);
  if (points.empty()) throw EmptyModelError();
  return PointCloudModel(std::move(points), voxel_size);
}

PointCloudModel load_model_file(const std::filesystem::path& path, double voxel_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return load_model(in, ext == ".ply" ? ModelFormat::ply : ModelFormat::csv, voxel_size);
}

void save_model_csv(std::ostream& out, const PointCloudModel& model) {
  const auto old_precision = out.precision(17);
  for (const auto& p : model.points())
    out << p.position.x() << ',' << p.position.y() << ',' << p.position.z() << ',' << p.elastic_modulus << '\n';
  out.precision(old_precision);
}

}  // namespace thinsheet
