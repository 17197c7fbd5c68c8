// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "urbanscene/ingest.hpp"

namespace urbanscene {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == ','; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::optional<GeoPoint> parse_origin_comment(std::string_view text) {
  // "origin <lon> <lat>" or "origin: <lon> <lat>"
  auto tokens = split_tokens(text);
  if (tokens.size() < 3) return std::nullopt;
  std::string_view key = tokens[0];
  if (!key.empty() && key.back() == ':') key.remove_suffix(1);
  if (key != "origin") return std::nullopt;
  auto lon = to_double(tokens[1]);
  auto lat = to_double(tokens[2]);
  if (!lon || !lat) return std::nullopt;
  return GeoPoint{*lon, *lat};
}

void check_finite(const LocalPoint& p, std::size_t offset) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw ParseError("non-finite coordinate at byte " + std::to_string(offset), 0, offset);
  }
}

PointCloud finish(PointCloud pc, std::optional<GeoPoint> header_origin,
                  std::optional<GeoPoint> override_origin) {
  if (pc.points.empty()) throw Error(ErrorCode::InvalidArgument, "point cloud has no points");
  if (override_origin) {
    pc.origin = *override_origin;
  } else if (header_origin) {
    pc.origin = *header_origin;
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "point cloud origin not declared (no origin header and none configured)");
  }
  require_valid(pc.origin);
  return pc;
}

PointCloud load_xyz(std::string_view bytes, std::optional<GeoPoint> origin) {
  PointCloud pc;
  std::optional<GeoPoint> header_origin;
  std::optional<bool> with_color;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    const std::size_t end = std::min(bytes.find('\n', pos), bytes.size());
    std::string_view line = bytes.substr(pos, end - pos);
    const std::size_t line_offset = pos;
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    if (line[first] == '#') {
      if (auto o = parse_origin_comment(line.substr(first + 1))) header_origin = o;
      continue;
    }
    const auto tokens = split_tokens(line);
    if (tokens.size() != 3 && tokens.size() != 6) {
      throw ParseError("truncated or malformed XYZ record at byte " + std::to_string(line_offset) +
                           " (line " + std::to_string(line_no) + "): expected 3 or 6 values, got " +
                           std::to_string(tokens.size()),
                       line_no, line_offset);
    }
    const bool colored = tokens.size() == 6;
    if (with_color && *with_color != colored) {
      throw ParseError("XYZ record at byte " + std::to_string(line_offset) +
                           " mixes colored and uncolored points",
                       line_no, line_offset);
    }
    with_color = colored;
    double v[6];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto d = to_double(tokens[i]);
      if (!d) {
        throw ParseError("invalid number '" + std::string(tokens[i]) + "' at byte " +
                             std::to_string(line_offset + static_cast<std::size_t>(tokens[i].data() - line.data())),
                         line_no, line_offset);
      }
      v[i] = *d;
    }
    LocalPoint p{v[0], v[1], v[2]};
    check_finite(p, line_offset);
    pc.points.push_back(p);
    if (colored) {
      Rgb c;
      for (int k = 0; k < 3; ++k) {
        const double cv = v[3 + k];
        if (cv < 0.0 || cv > 255.0 || cv != std::floor(cv)) {
          throw ParseError("color component out of range at byte " + std::to_string(line_offset),
                           line_no, line_offset);
        }
      }
      c.r = static_cast<std::uint8_t>(v[3]);
      c.g = static_cast<std::uint8_t>(v[4]);
      c.b = static_cast<std::uint8_t>(v[5]);
      pc.colors.push_back(c);
    }
  }
  return finish(std::move(pc), header_origin, origin);
}

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::I8;
  if (name == "uchar" || name == "uint8") return PlyType::U8;
  if (name == "short" || name == "int16") return PlyType::I16;
  if (name == "ushort" || name == "uint16") return PlyType::U16;
  if (name == "int" || name == "int32") return PlyType::I32;
  if (name == "uint" || name == "uint32") return PlyType::U32;
  if (name == "float" || name == "float32") return PlyType::F32;
  if (name == "double" || name == "float64") return PlyType::F64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::I8:
    case PlyType::U8: return 1;
    case PlyType::I16:
    case PlyType::U16: return 2;
    case PlyType::I32:
    case PlyType::U32:
    case PlyType::F32: return 4;
    case PlyType::F64: return 8;
  }
  return 0;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    std::reverse(buf, buf + sizeof(T));
    std::memcpy(&v, buf, sizeof(T));
  }
  return v;
}

template <typename T>
void write_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.append(buf, sizeof(T));
}

double read_scalar(const char* p, PlyType t) {
  switch (t) {
    case PlyType::I8: return read_le<std::int8_t>(p);
    case PlyType::U8: return read_le<std::uint8_t>(p);
    case PlyType::I16: return read_le<std::int16_t>(p);
    case PlyType::U16: return read_le<std::uint16_t>(p);
    case PlyType::I32: return read_le<std::int32_t>(p);
    case PlyType::U32: return read_le<std::uint32_t>(p);
    case PlyType::F32: return read_le<float>(p);
    case PlyType::F64: return read_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
  std::size_t stride() const {
    std::size_t s = 0;
    for (const auto& p : props) s += ply_size(p.type);
    return s;
  }
};

PointCloud load_ply(std::string_view bytes, std::optional<GeoPoint> origin) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= bytes.size()) return std::nullopt;
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) return std::nullopt;
    std::string_view line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return line;
  };
  auto header_error = [&](const std::string& msg) {
    return ParseError("PLY header: " + msg + " (line " + std::to_string(line_no) + ")", line_no, pos);
  };

  auto magic = next_line();
  if (!magic || *magic != "ply") throw header_error("missing 'ply' magic");
  enum class Format { Ascii, BinaryLE } format = Format::Ascii;
  bool have_format = false;
  std::vector<PlyElement> elements;
  std::optional<GeoPoint> header_origin;
  for (;;) {
    auto line = next_line();
    if (!line) throw header_error("missing end_header");
    auto tokens = split_tokens(*line);
    if (tokens.empty()) continue;
    if (tokens[0] == "end_header") break;
    if (tokens[0] == "format") {
      if (tokens.size() < 2) throw header_error("incomplete format line");
      if (tokens[1] == "ascii") {
        format = Format::Ascii;
      } else if (tokens[1] == "binary_little_endian") {
        format = Format::BinaryLE;
      } else {
        throw header_error("unsupported format '" + std::string(tokens[1]) + "'");
      }
      have_format = true;
    } else if (tokens[0] == "comment" || tokens[0] == "obj_info") {
      if (auto o = parse_origin_comment(line->substr(line->find(tokens[0]) + tokens[0].size()))) {
        header_origin = o;
      }
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) throw header_error("malformed element line");
      PlyElement e;
      e.name = std::string(tokens[1]);
      auto count = to_double(tokens[2]);
      if (!count || *count < 0 || *count != std::floor(*count)) throw header_error("bad element count");
      e.count = static_cast<std::size_t>(*count);
      elements.push_back(std::move(e));
    } else if (tokens[0] == "property") {
      if (elements.empty()) throw header_error("property before element");
      PlyProperty prop;
      if (tokens.size() >= 2 && tokens[1] == "list") {
        if (tokens.size() != 5) throw header_error("malformed list property");
        prop.is_list = true;
        prop.name = std::string(tokens[4]);
        prop.type = PlyType::U8;
      } else {
        if (tokens.size() != 3) throw header_error("malformed property line");
        auto t = ply_type(tokens[1]);
        if (!t) throw header_error("unknown property type '" + std::string(tokens[1]) + "'");
        prop.type = *t;
        prop.name = std::string(tokens[2]);
      }
      elements.back().props.push_back(std::move(prop));
    } else {
      throw header_error("unexpected keyword '" + std::string(tokens[0]) + "'");
    }
  }
  if (!have_format) throw header_error("missing format line");

  const auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                      [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) throw header_error("no vertex element");
  const PlyElement& vertex = *vertex_it;
  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (std::size_t i = 0; i < vertex.props.size(); ++i) {
    const std::string& n = vertex.props[i].name;
    if (vertex.props[i].is_list) throw header_error("list properties on vertex are unsupported");
    if (n == "x") ix = static_cast<int>(i);
    if (n == "y") iy = static_cast<int>(i);
    if (n == "z") iz = static_cast<int>(i);
    if (n == "red" || n == "r") ir = static_cast<int>(i);
    if (n == "green" || n == "g") ig = static_cast<int>(i);
    if (n == "blue" || n == "b") ib = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw header_error("vertex element lacks x/y/z");
  const bool colored = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud pc;
  pc.points.reserve(vertex.count);
  if (colored) pc.colors.reserve(vertex.count);

  if (format == Format::BinaryLE) {
    std::size_t offset = pos;
    for (auto it = elements.begin(); it != vertex_it; ++it) {
      for (const auto& p : it->props) {
        if (p.is_list) throw header_error("list element before vertex is unsupported");
      }
      offset += it->count * it->stride();
    }
    std::vector<std::size_t> prop_offset(vertex.props.size());
    std::size_t acc = 0;
    for (std::size_t i = 0; i < vertex.props.size(); ++i) {
      prop_offset[i] = acc;
      acc += ply_size(vertex.props[i].type);
    }
    const std::size_t stride = acc;
    const std::size_t needed = vertex.count * stride;
    if (offset > bytes.size() || bytes.size() - offset < needed) {
      const std::size_t available = offset > bytes.size() ? 0 : bytes.size() - offset;
      const std::size_t complete = stride ? available / stride : 0;
      throw ParseError("truncated PLY payload at byte " + std::to_string(offset + complete * stride) +
                           ": header declares " + std::to_string(vertex.count) + " vertices, payload holds " +
                           std::to_string(complete),
                       0, offset + complete * stride);
    }
    const char* base = bytes.data() + offset;
    for (std::size_t i = 0; i < vertex.count; ++i) {
      const char* rec = base + i * stride;
      LocalPoint p{read_scalar(rec + prop_offset[ix], vertex.props[ix].type),
                   read_scalar(rec + prop_offset[iy], vertex.props[iy].type),
                   read_scalar(rec + prop_offset[iz], vertex.props[iz].type)};
      check_finite(p, offset + i * stride);
      pc.points.push_back(p);
      if (colored) {
        pc.colors.push_back({static_cast<std::uint8_t>(read_scalar(rec + prop_offset[ir], vertex.props[ir].type)),
                             static_cast<std::uint8_t>(read_scalar(rec + prop_offset[ig], vertex.props[ig].type)),
                             static_cast<std::uint8_t>(read_scalar(rec + prop_offset[ib], vertex.props[ib].type))});
      }
    }
    const bool vertex_last = std::next(vertex_it) == elements.end();
    if (vertex_last && offset + needed != bytes.size()) {
      throw ParseError("PLY payload has " + std::to_string(bytes.size() - offset - needed) +
                           " bytes beyond the declared " + std::to_string(vertex.count) + " vertices (byte " +
                           std::to_string(offset + needed) + ")",
                       0, offset + needed);
    }
  } else {
    for (auto it = elements.begin(); it != vertex_it; ++it) {
      for (std::size_t k = 0; k < it->count; ++k) {
        if (!next_line()) throw ParseError("truncated ASCII PLY at byte " + std::to_string(pos), line_no, pos);
      }
    }
    for (std::size_t i = 0; i < vertex.count; ++i) {
      const std::size_t line_offset = pos;
      auto line = next_line();
      if (!line && pos < bytes.size()) {
        // Last line without a trailing newline.
        line = bytes.substr(pos);
        pos = bytes.size();
      }
      if (!line) {
        throw ParseError("truncated ASCII PLY at byte " + std::to_string(line_offset) + ": header declares " +
                             std::to_string(vertex.count) + " vertices, found " + std::to_string(i),
                         line_no, line_offset);
      }
      auto tokens = split_tokens(*line);
      if (tokens.size() != vertex.props.size()) {
        throw ParseError("malformed ASCII PLY vertex at byte " + std::to_string(line_offset), line_no,
                         line_offset);
      }
      auto get = [&](int idx) {
        auto d = to_double(tokens[static_cast<std::size_t>(idx)]);
        if (!d) throw ParseError("invalid number in ASCII PLY at byte " + std::to_string(line_offset), line_no, line_offset);
        return *d;
      };
      LocalPoint p{get(ix), get(iy), get(iz)};
      check_finite(p, line_offset);
      pc.points.push_back(p);
      if (colored) {
        pc.colors.push_back({static_cast<std::uint8_t>(get(ir)), static_cast<std::uint8_t>(get(ig)),
                             static_cast<std::uint8_t>(get(ib))});
      }
    }
  }
  return finish(std::move(pc), header_origin, origin);
}

}  // namespace

PointCloud load_point_cloud(std::string_view bytes, std::optional<GeoPoint> origin) {
  if (bytes.substr(0, 4) == "ply\n" || bytes.substr(0, 5) == "ply\r\n") return load_ply(bytes, origin);
  return load_xyz(bytes, origin);
}

std::string write_xyz(const PointCloud& pc) {
  std::string out;
  out.reserve(pc.points.size() * 48 + 64);
  out += "# origin ";
  append_double(out, pc.origin.lon);
  out += ' ';
  append_double(out, pc.origin.lat);
  out += '\n';
  for (std::size_t i = 0; i < pc.points.size(); ++i) {
    const LocalPoint& p = pc.points[i];
    append_double(out, p.x);
    out += ' ';
    append_double(out, p.y);
    out += ' ';
    append_double(out, p.z);
    if (pc.has_colors()) {
      const Rgb& c = pc.colors[i];
      out += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
    }
    out += '\n';
  }
  return out;
}

std::string write_ply(const PointCloud& pc) {
  std::string out = "ply\nformat binary_little_endian 1.0\ncomment origin ";
  append_double(out, pc.origin.lon);
  out += ' ';
  append_double(out, pc.origin.lat);
  out += "\nelement vertex " + std::to_string(pc.points.size()) +
         "\nproperty double x\nproperty double y\nproperty double z\n";
  if (pc.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";
  out.reserve(out.size() + pc.points.size() * 27);
  for (std::size_t i = 0; i < pc.points.size(); ++i) {
    write_le(out, pc.points[i].x);
    write_le(out, pc.points[i].y);
    write_le(out, pc.points[i].z);
    if (pc.has_colors()) {
      write_le(out, pc.colors[i].r);
      write_le(out, pc.colors[i].g);
      write_le(out, pc.colors[i].b);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed for " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace urbanscene
