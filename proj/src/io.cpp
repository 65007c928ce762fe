#include "pmhdg/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pmhdg {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  sections_[section][key] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit != sections_.end() && sit->second.count(key)) return true;
  sit = sections_.find("");
  return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto sit = sections_.find(section);
  if (sit != sections_.end()) {
    auto kit = sit->second.find(key);
    if (kit != sit->second.end()) return kit->second;
  }
  sit = sections_.find("");
  if (sit != sections_.end()) {
    auto kit = sit->second.find(key);
    if (kit != sit->second.end()) return kit->second;
  }
  return fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const std::string v = get(section, key, "");
  if (v.empty()) return fallback;
  std::size_t pos = 0;
  const double out = std::stod(v, &pos);
  if (pos != v.size()) {
    throw std::runtime_error("config: bad numeric value '" + v + "' for " + key);
  }
  return out;
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
  const std::string v = get(section, key, "");
  if (v.empty()) return fallback;
  std::size_t pos = 0;
  const int out = std::stoi(v, &pos);
  if (pos != v.size()) {
    throw std::runtime_error("config: bad integer value '" + v + "' for " + key);
  }
  return out;
}

Config parse_config_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config: unterminated section at line " +
                                 std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: expected 'key = value' at line " +
                               std::to_string(lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
    }
    cfg.set(section, key, value);
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void write_vtk(const std::string& path, const Triangulation& tri,
               const std::vector<VtkField>& fields) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("vtk: cannot open " + path);
  out.precision(12);
  out << "# vtk DataFile Version 3.0\n";
  out << "pmhdg fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << tri.vertices.size() << " double\n";
  for (const Vec2& v : tri.vertices) out << v.x << " " << v.y << " 0\n";
  out << "CELLS " << tri.cells.size() << " " << 4 * tri.cells.size() << "\n";
  for (const auto& c : tri.cells) out << "3 " << c[0] << " " << c[1] << " " << c[2] << "\n";
  out << "CELL_TYPES " << tri.cells.size() << "\n";
  for (std::size_t i = 0; i < tri.cells.size(); ++i) out << "5\n";
  if (fields.empty()) {
    if (!out) throw std::runtime_error("vtk: write failed for " + path);
    return;
  }
  out << "CELL_DATA " << tri.cells.size() << "\n";
  for (const VtkField& vf : fields) {
    const DiscreteField& f = *vf.field;
    const ReferenceBasis basis(f.layout.degree);
    const TriangleQuadrature cq = triangle_quadrature(f.layout.degree);
    const Eigen::MatrixXd tab = basis.tabulate(cq.points);
    const bool vec = f.layout.components == 2;
    if (vec) {
      out << "VECTORS " << vf.name << " double\n";
    } else {
      out << "SCALARS " << vf.name << " double 1\nLOOKUP_TABLE default\n";
    }
    for (std::size_t cell = 0; cell < tri.cells.size(); ++cell) {
      double mx = 0.0, my = 0.0;
      for (std::size_t q = 0; q < cq.points.size(); ++q) {
        for (int j = 0; j < basis.dim(); ++j) {
          // reference weights sum to 1/2 = reference area, so this is the
          // cell average (the affine Jacobian cancels)
          mx += 2.0 * cq.weights[q] * tab(q, j) *
                f.coeffs[f.layout.dof(static_cast<int>(cell), j, 0)];
          if (vec) {
            my += 2.0 * cq.weights[q] * tab(q, j) *
                  f.coeffs[f.layout.dof(static_cast<int>(cell), j, 1)];
          }
        }
      }
      if (vec) {
        out << mx << " " << my << " 0\n";
      } else {
        out << mx << "\n";
      }
    }
  }
  if (!out) throw std::runtime_error("vtk: write failed for " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
  char buf[32];
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw std::runtime_error("csv: row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      out << buf << (i + 1 < row.size() ? "," : "\n");
    }
  }
  if (!out) throw std::runtime_error("csv: write failed for " + path);
}

}  // namespace pmhdg
