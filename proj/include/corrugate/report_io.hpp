#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "corrugate/driver.hpp"
#include "corrugate/grid.hpp"

namespace corrugate {

struct ObjMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> triangles;  // zero-based
};

/// Writes u (n = 2, values in R^3) as a triangulated height field: one
/// vertex per node in row-major order, each grid quad split into two
/// triangles. Throws DimensionError or IOError.
void export_mesh(const VectorField& u, const std::string& path);

/// Reads the subset of OBJ written by export_mesh. Throws IOError.
ObjMesh load_obj(const std::string& path);

inline const std::vector<std::string> kReportColumns{
    "q", "delta_q", "lambda_q", "Lambda_q", "deficit_before", "deficit_after",
    "c1_increment", "c2_estimate", "wall_ms"};

std::string report_csv(const RunReport& report);
nlohmann::ordered_json report_json(const RunReport& report);

/// Writes `<stem>.csv` and `<stem>.json`. Throws IOError.
void export_report(const RunReport& report, const std::string& stem);
void write_report_csv(const RunReport& report, const std::string& path);
void write_report_json(const RunReport& report, const std::string& path);

/// Formats with 17 significant digits.
std::string format_double(double x);

}  // namespace corrugate
