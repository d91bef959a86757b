#pragma once

#include <cstdint>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lgs::ply {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Type { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

inline std::size_t type_size(Type t) {
  switch (t) {
    case Type::int8:
    case Type::uint8: return 1;
    case Type::int16:
    case Type::uint16: return 2;
    case Type::int32:
    case Type::uint32:
    case Type::float32: return 4;
    case Type::float64: return 8;
  }
  return 0;
}

inline Type parse_type(std::string_view s) {
  if (s == "char" || s == "int8") return Type::int8;
  if (s == "uchar" || s == "uint8") return Type::uint8;
  if (s == "short" || s == "int16") return Type::int16;
  if (s == "ushort" || s == "uint16") return Type::uint16;
  if (s == "int" || s == "int32") return Type::int32;
  if (s == "uint" || s == "uint32") return Type::uint32;
  if (s == "float" || s == "float32") return Type::float32;
  if (s == "double" || s == "float64") return Type::float64;
  throw FormatError("unknown PLY property type: " + std::string(s));
}

struct Property {
  std::string name;
  Type type = Type::float32;
  bool is_list = false;
  Type count_type = Type::uint8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;

  int find(std::string_view prop) const {
    for (std::size_t i = 0; i < properties.size(); ++i)
      if (properties[i].name == prop) return static_cast<int>(i);
    return -1;
  }
};

struct Header {
  bool ascii = false;
  std::vector<std::string> comments;
  std::vector<Element> elements;
  std::size_t size = 0;  // bytes up to and including "end_header\n"
};

inline Header parse_header(std::string_view bytes) {
  Header h;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) throw FormatError("PLY header is not terminated");
    std::string line(bytes.substr(pos, nl - pos));
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "ply") throw FormatError("missing 'ply' magic");
  bool have_format = false;
  for (;;) {
    const std::string line = next_line();
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw.empty()) continue;
    if (kw == "end_header") break;
    if (kw == "format") {
      std::string fmt, ver;
      ss >> fmt >> ver;
      if (fmt == "ascii") h.ascii = true;
      else if (fmt == "binary_little_endian") h.ascii = false;
      else throw FormatError("unsupported PLY format: " + fmt);
      have_format = true;
    } else if (kw == "comment" || kw == "obj_info") {
      h.comments.push_back(line.size() > kw.size() + 1 ? line.substr(kw.size() + 1) : "");
    } else if (kw == "element") {
      Element e;
      long long count = -1;
      ss >> e.name >> count;
      if (e.name.empty() || count < 0 || ss.fail()) throw FormatError("malformed element line: " + line);
      e.count = static_cast<std::size_t>(count);
      h.elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (h.elements.empty()) throw FormatError("property before any element");
      Property p;
      std::string t;
      ss >> t;
      if (t == "list") {
        std::string ct, it;
        ss >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_type(ct);
        p.type = parse_type(it);
      } else {
        p.type = parse_type(t);
        ss >> p.name;
      }
      if (p.name.empty()) throw FormatError("malformed property line: " + line);
      h.elements.back().properties.push_back(std::move(p));
    } else {
      throw FormatError("unexpected PLY header keyword: " + kw);
    }
  }
  if (!have_format) throw FormatError("PLY header lacks a format line");
  h.size = pos;
  return h;
}

namespace detail {

inline double read_scalar(const char* p, Type t) {
  switch (t) {
    case Type::int8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case Type::uint8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
    case Type::int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case Type::uint16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case Type::int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case Type::uint32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case Type::float32: { float v; std::memcpy(&v, p, 4); return v; }
    case Type::float64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

}  // namespace detail

/// Scalar columns of one element, values widened to double (exact for
/// every PLY scalar type). List properties are skipped and left empty.
struct Table {
  const Element* element = nullptr;
  std::vector<std::vector<double>> columns;

  const std::vector<double>* column(std::string_view name) const {
    const int i = element->find(name);
    return i < 0 ? nullptr : &columns[static_cast<std::size_t>(i)];
  }
};

/// Reads the element called `name`, skipping any elements before it.
inline Table read_element(std::string_view bytes, const Header& h, std::string_view name) {
  std::size_t pos = h.size;
  Table table;
  if (h.ascii) {
    std::istringstream ss{std::string(bytes.substr(pos))};
    for (const auto& e : h.elements) {
      const bool wanted = e.name == name;
      if (wanted) {
        table.element = &e;
        table.columns.assign(e.properties.size(), {});
        for (auto& c : table.columns) c.reserve(e.count);
      }
      for (std::size_t r = 0; r < e.count; ++r) {
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          double v = 0.0;
          if (p.is_list) {
            std::size_t n = 0;
            if (!(ss >> n)) throw FormatError("truncated ASCII PLY payload");
            for (std::size_t k = 0; k < n; ++k)
              if (!(ss >> v)) throw FormatError("truncated ASCII PLY payload");
            continue;
          }
          if (!(ss >> v)) throw FormatError("truncated ASCII PLY payload");
          if (wanted) table.columns[pi].push_back(v);
        }
      }
      if (wanted) return table;
    }
    throw FormatError("PLY has no element '" + std::string(name) + "'");
  }
  for (const auto& e : h.elements) {
    const bool wanted = e.name == name;
    if (wanted) {
      table.element = &e;
      table.columns.assign(e.properties.size(), std::vector<double>(e.count));
    }
    for (std::size_t r = 0; r < e.count; ++r) {
      for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
        const auto& p = e.properties[pi];
        if (p.is_list) {
          const std::size_t cs = type_size(p.count_type);
          if (pos + cs > bytes.size()) throw FormatError("truncated PLY payload");
          const auto n = static_cast<std::size_t>(detail::read_scalar(bytes.data() + pos, p.count_type));
          pos += cs + n * type_size(p.type);
          if (pos > bytes.size()) throw FormatError("truncated PLY payload");
          continue;
        }
        const std::size_t s = type_size(p.type);
        if (pos + s > bytes.size()) throw FormatError("truncated PLY payload");
        if (wanted) table.columns[pi][r] = detail::read_scalar(bytes.data() + pos, p.type);
        pos += s;
      }
    }
    if (wanted) return table;
  }
  throw FormatError("PLY has no element '" + std::string(name) + "'");
}

}  // namespace lgs::ply
