#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "corrugate/driver.hpp"
#include "corrugate/errors.hpp"
#include "corrugate/report_io.hpp"

using namespace corrugate;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "corrugate_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

VectorField wavy(int points) {
  return sample_vector(GridDomain::unit(2, points), 3, [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0];
    out[1] = x[1];
    out[2] = 0.1 * std::sin(2.0 * std::numbers::pi * x[0]) * std::cos(std::numbers::pi * x[1]) + 1.0 / 3.0;
  });
}

RunConfig one_stage() {
  RunConfig c;
  c.grid_points = 513;
  c.upper = 0.25;
  c.schedule.growth_base = 1024.0;
  c.schedule.b_exponent = 1.2;
  c.schedule.J = 2;
  c.schedule.K_factor = 3.0;
  c.schedule.stages = 1;
  c.eta0 = 0.04;
  c.lambda_constant = 1.05 * 0.01 / 6.0;
  c.deterministic = true;
  return c;
}

}  // namespace

TEST_CASE("OBJ mesh of a flat 9x9 grid") {
  const Preset p = make_preset("exact-deficit", 2, 0.1, GridDomain::unit(2, 9));
  const fs::path path = scratch("flat.obj");
  export_mesh(p.u0, path.string());
  const ObjMesh m = load_obj(path.string());
  // points² vertices and 2 (points - 1)² triangles.
  CHECK(m.vertices.size() == 81);
  CHECK(m.triangles.size() == 128);
  for (const auto& v : m.vertices) CHECK(v[2] == 0.0);
  CHECK(m.vertices[40][0] == 0.5);
  CHECK(m.vertices[40][1] == 0.5);
  CHECK(m.vertices[1][1] == 0.125);
  // Every triangle has positive area with consistent orientation.
  for (const auto& t : m.triangles) {
    const auto& a = m.vertices[t[0]];
    const auto& b = m.vertices[t[1]];
    const auto& c = m.vertices[t[2]];
    const double cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    CHECK(cross < 0.0);
  }
}

TEST_CASE("OBJ edge lengths survive the roundtrip") {
  const VectorField u = wavy(41);
  const fs::path path = scratch("wavy.obj");
  export_mesh(u, path.string());
  const ObjMesh m = load_obj(path.string());
  REQUIRE(m.vertices.size() == u.node_count());
  double worst = 0.0;
  auto at = [&u](int k) { return std::array<double, 3>{u(k, 0), u(k, 1), u(k, 2)}; };
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const int i = t[e], j = t[(e + 1) % 3];
      worst = std::max(worst, std::abs(dist(m.vertices[i], m.vertices[j]) - dist(at(i), at(j))));
    }
  CHECK(worst <= 1e-7);
}

TEST_CASE("OBJ guards") {
  const VectorField bad = sample_vector(GridDomain::unit(2, 9), 2, [](auto, std::span<double> out) {
    out[0] = out[1] = 0.0;
  });
  CHECK_THROWS_AS(export_mesh(bad, scratch("bad.obj").string()), DimensionError);
  CHECK_THROWS_AS(export_mesh(wavy(9), "/nonexistent/dir/x.obj"), IOError);
  CHECK_THROWS_AS(load_obj("/nonexistent/x.obj"), IOError);
  const fs::path broken = scratch("broken.obj");
  std::ofstream(broken) << "v 0 0 0\nf 1 2 3\n";
  CHECK_THROWS_AS(load_obj(broken.string()), IOError);
}

TEST_CASE("CSV rows follow the stages") {
  RunConfig c = one_stage();
  c.schedule.stages = 0;
  c.grid_points = 65;
  const std::string empty = report_csv(run(c));
  CHECK(empty == "q,delta_q,lambda_q,Lambda_q,deficit_before,deficit_after,c1_increment,c2_estimate,wall_ms\n");

  const RunReport rep = run(one_stage());
  const std::string csv = report_csv(rep);
  std::istringstream in(csv);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK_FALSE(std::getline(in, extra));
  CHECK(row.rfind("0,0.10000000000000001,", 0) == 0);
  // Doubles are written with enough digits to round-trip.
  std::vector<std::string> cells;
  std::stringstream rs(row);
  for (std::string cell; std::getline(rs, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == kReportColumns.size());
  CHECK(std::stod(cells[5]) == rep.stages[0].report.deficit_after);
  CHECK(std::stod(cells[8]) == 0.0);
}

TEST_CASE("JSON report round-trips and is deterministic") {
  const RunReport a = run(one_stage());
  const RunReport b = run(one_stage());
  const fs::path pa = scratch("a.json"), pb = scratch("b.json");
  write_report_json(a, pa.string());
  write_report_json(b, pb.string());
  CHECK(slurp(pa) == slurp(pb));
  CHECK(a.iterates.back().raw() == b.iterates.back().raw());

  const auto j = nlohmann::json::parse(slurp(pa));
  CHECK(j["note"] == kPresetNote);
  CHECK(j["stages"][0]["deficit_after"].get<double>() == a.stages[0].report.deficit_after);
  CHECK(j["stages"][0]["c2_estimate"].get<double>() == a.stages[0].report.c2_estimate);
  CHECK(j["deficit_trajectory"].get<std::vector<double>>() == a.deficit_trajectory);
  CHECK(j["beta"][0] == 1);
  CHECK(j["beta"][1] == 7);
  CHECK(j["error"].is_null());
  CHECK(j["stages"][0]["steps"].size() == 3);

  const fs::path stem = scratch("both");
  export_report(a, stem.string());
  CHECK(fs::exists(stem.string() + ".csv"));
  CHECK(fs::exists(stem.string() + ".json"));
  CHECK_THROWS_AS(write_report_csv(a, "/nonexistent/dir/r.csv"), IOError);
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(0.0) == "0");
}
