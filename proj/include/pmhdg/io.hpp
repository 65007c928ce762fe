#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmhdg/mesh.hpp"
#include "pmhdg/spaces.hpp"

namespace pmhdg {

/// Flat "key = value" configuration with optional [section] scoping. Keys
/// outside any section live in the "" section. '#' starts a comment.
class Config {
 public:
  void set(const std::string& section, const std::string& key,
           const std::string& value);
  bool has(const std::string& section, const std::string& key) const;

  /// Section value, falling back to the global section, then to `fallback`.
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);

/// Named cell fields for export; vector fields get one value triple per cell
/// (z = 0), scalars one value per cell, both cell-averaged.
struct VtkField {
  std::string name;
  const DiscreteField* field = nullptr;
};

/// Legacy ASCII VTK unstructured grid (CELL_TYPES 5) with cell-averaged data.
void write_vtk(const std::string& path, const Triangulation& tri,
               const std::vector<VtkField>& fields);

/// CSV with a header row; every data row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace pmhdg
