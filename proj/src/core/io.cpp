// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "sqkit/error.hpp"

namespace sqkit {

namespace {

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

double parse_double(const std::string& token, int line) {
  double value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError("line " + std::to_string(line) + ": invalid number '" +
                     token + "'");
  }
  return value;
}

long parse_long(const std::string& token, int line) {
  long value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(line) + ": invalid integer '" +
                     token + "'");
  }
  return value;
}

void write_number(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) tokens.push_back(t);
  return tokens;
}

void add_fan(TriangleMesh& mesh, const std::vector<std::uint32_t>& polygon,
             int line) {
  if (polygon.size() < 3) {
    throw InputError("line " + std::to_string(line) +
                     ": face needs at least three vertices");
  }
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
    mesh.faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
  }
}

void check_indices(const TriangleMesh& mesh) {
  for (const Face& f : mesh.faces) {
    for (std::uint32_t i : f) {
      if (i >= mesh.vertices.size()) throw InputError("face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw InputError("degenerate face with a repeated vertex index");
    }
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

}  // namespace

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  std::vector<std::uint32_t> polygon;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) {
        throw InputError("line " + std::to_string(line_no) + ": vertex needs x y z");
      }
      mesh.vertices.emplace_back(parse_double(tokens[1], line_no),
                                 parse_double(tokens[2], line_no),
                                 parse_double(tokens[3], line_no));
    } else if (tokens[0] == "f") {
      polygon.clear();
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string head = tokens[i].substr(0, tokens[i].find('/'));
        long idx = parse_long(head, line_no);
        const auto count = static_cast<long>(mesh.vertices.size());
        if (idx < 0) idx = count + idx + 1;
        if (idx < 1 || idx > count) {
          throw InputError("line " + std::to_string(line_no) +
                           ": face index out of range");
        }
        polygon.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      add_fan(mesh, polygon, line_no);
    }
  }
  check_indices(mesh);
  return mesh;
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  for (const Vec3& v : mesh.vertices) {
    out << "v ";
    write_number(out, v.x());
    out << ' ';
    write_number(out, v.y());
    out << ' ';
    write_number(out, v.z());
    out << '\n';
  }
  for (const Face& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

TriangleMesh read_ply(std::istream& in) {
  struct Property {
    std::string name;
    bool is_list = false;
  };
  struct Element {
    std::string name;
    long count = 0;
    std::vector<Property> properties;
  };

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || tokenize(line) != std::vector<std::string>{"ply"}) {
    throw InputError("not a PLY file (missing 'ply' magic)");
  }
  ++line_no;
  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2) throw InputError("malformed PLY format line");
      if (tokens[1] != "ascii") {
        throw InputError("binary PLY is not supported (format " + tokens[1] +
                         "); convert to ASCII");
      }
      ascii = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() < 3) throw InputError("malformed PLY element line");
      elements.push_back({tokens[1], parse_long(tokens[2], line_no), {}});
    } else if (tokens[0] == "property") {
      if (elements.empty()) throw InputError("PLY property before any element");
      if (tokens.size() >= 5 && tokens[1] == "list") {
        elements.back().properties.push_back({tokens[4], true});
      } else if (tokens.size() >= 3) {
        elements.back().properties.push_back({tokens[2], false});
      } else {
        throw InputError("malformed PLY property line");
      }
    } else if (tokens[0] == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw InputError("PLY header has no end_header");
  if (!ascii) throw InputError("PLY header has no format line");

  TriangleMesh mesh;
  std::vector<std::uint32_t> polygon;
  for (const Element& element : elements) {
    for (long r = 0; r < element.count; ++r) {
      if (!std::getline(in, line)) {
        throw InputError("PLY body ended early in element '" + element.name + "'");
      }
      ++line_no;
      const auto tokens = tokenize(line);
      std::size_t pos = 0;
      auto next = [&]() -> const std::string& {
        if (pos >= tokens.size()) {
          throw InputError("line " + std::to_string(line_no) + ": too few values");
        }
        return tokens[pos++];
      };
      Vec3 v = Vec3::Zero();
      int coords = 0;
      polygon.clear();
      for (const Property& p : element.properties) {
        if (p.is_list) {
          const long n = parse_long(next(), line_no);
          const bool indices = p.name == "vertex_indices" || p.name == "vertex_index";
          for (long i = 0; i < n; ++i) {
            const std::string& t = next();
            if (indices) {
              const long idx = parse_long(t, line_no);
              if (idx < 0) throw InputError("negative PLY vertex index");
              polygon.push_back(static_cast<std::uint32_t>(idx));
            }
          }
        } else {
          const std::string& t = next();
          if (element.name == "vertex") {
            if (p.name == "x") v.x() = parse_double(t, line_no), ++coords;
            if (p.name == "y") v.y() = parse_double(t, line_no), ++coords;
            if (p.name == "z") v.z() = parse_double(t, line_no), ++coords;
          }
        }
      }
      if (element.name == "vertex") {
        if (coords != 3) throw InputError("PLY vertex element lacks x, y or z");
        mesh.vertices.push_back(v);
      } else if (element.name == "face") {
        add_fan(mesh, polygon, line_no);
      }
    }
  }
  check_indices(mesh);
  return mesh;
}

PointCloud read_xyz(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens.size() != 3) {
      throw InputError("line " + std::to_string(line_no) +
                       ": expected 'x y z', got " + std::to_string(tokens.size()) +
                       " fields");
    }
    cloud.points.emplace_back(parse_double(tokens[0], line_no),
                              parse_double(tokens[1], line_no),
                              parse_double(tokens[2], line_no));
  }
  return cloud;
}

void write_xyz(std::ostream& out, const PointCloud& cloud) {
  for (const Vec3& p : cloud.points) {
    write_number(out, p.x());
    out << ' ';
    write_number(out, p.y());
    out << ' ';
    write_number(out, p.z());
    out << '\n';
  }
}

bool has_mesh_extension(const std::string& path) {
  const std::string ext = lower_extension(path);
  return ext == "obj" || ext == "ply";
}

TriangleMesh load_mesh(const std::string& path) {
  const std::string ext = lower_extension(path);
  auto in = open_input(path);
  if (ext == "obj") return read_obj(in);
  if (ext == "ply") return read_ply(in);
  throw InputError("unsupported mesh format '" + path + "' (expected .obj or .ply)");
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
  auto out = open_output(path);
  write_obj(out, mesh);
}

PointCloud load_cloud(const std::string& path) {
  if (has_mesh_extension(path)) {
    PointCloud cloud;
    cloud.points = load_mesh(path).vertices;
    return cloud;
  }
  auto in = open_input(path);
  return read_xyz(in);
}

void save_xyz(const std::string& path, const PointCloud& cloud) {
  auto out = open_output(path);
  write_xyz(out, cloud);
}

}  // namespace sqkit
