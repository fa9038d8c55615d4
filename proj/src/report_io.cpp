#include "corrugate/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "corrugate/errors.hpp"

namespace corrugate {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IOError("write to '" + path + "' failed");
}

nlohmann::ordered_json step_json(const StepDiagnostics& d) {
  nlohmann::ordered_json j;
  j["kind"] = d.kind;
  j["nu"] = d.nu;
  j["lambda"] = d.lambda;
  j["mu"] = d.mu;
  j["delta"] = d.delta;
  j["depth"] = d.depth;
  j["error_sup"] = d.error_sup;
  j["floor_sup"] = d.floor_sup;
  j["error_above_floor"] = d.error_above_floor;
  j["increment_c0"] = d.increment_c0;
  j["increment_c1"] = d.increment_c1;
  j["w_sup"] = d.w_sup;
  j["F_sup"] = d.F_sup;
  j["M_sup"] = d.M_sup;
  j["ibp_residual_sup"] = d.ibp_residual_sup;
  j["gram_condition"] = d.gram_condition;
  j["min_metric_eigenvalue_before"] = d.min_metric_eigenvalue_before;
  j["min_metric_eigenvalue_after"] = d.min_metric_eigenvalue_after;
  return j;
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["preset"] = c.preset;
  j["scale"] = c.scale;
  j["epsilon"] = c.epsilon;
  j["grid_points"] = c.grid_points;
  j["lower"] = c.lower;
  j["upper"] = c.upper;
  j["delta0"] = c.schedule.delta0;
  j["lambda0"] = c.schedule.lambda0;
  j["growth_base"] = c.schedule.growth_base;
  j["b_exponent"] = c.schedule.b_exponent;
  j["tau"] = c.schedule.tau;
  j["J"] = c.schedule.J;
  j["K_factor"] = c.schedule.K_factor;
  j["stages"] = c.schedule.stages;
  j["alpha_target"] = c.schedule.alpha_target;
  j["eta0"] = c.eta0;
  j["moll_constant"] = c.moll_constant;
  j["lambda_constant"] = c.lambda_constant;
  j["r_threshold"] = c.r_threshold;
  j["kaellen_nearness"] = c.kaellen_nearness;
  j["positivity"] = c.positivity;
  j["amplitude_floor"] = c.amplitude_floor;
  j["direction_threshold"] = c.direction_threshold;
  j["immersion_threshold"] = c.immersion_threshold;
  j["samples_per_period"] = c.samples_per_period;
  j["holder_alphas"] = c.holder_alphas;
  j["deterministic"] = c.deterministic;
  return j;
}

}  // namespace

void export_mesh(const VectorField& u, const std::string& path) {
  const GridDomain& d = u.domain();
  if (d.dim() != 2 || u.rows() != 3) throw DimensionError("export_mesh: needs n = 2 and values in R^3");
  std::ofstream out = open_out(path);
  const int p0 = d.points(0), p1 = d.points(1);
  char buf[128];
  for (std::size_t node = 0; node < d.node_count(); ++node) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", u(node, 0), u(node, 1), u(node, 2));
    out << buf;
  }
  for (int i = 0; i + 1 < p0; ++i) {
    for (int j = 0; j + 1 < p1; ++j) {
      const int a = i * p1 + j + 1;  // OBJ indices are one-based
      const int b = a + 1, c = a + p1, e = c + 1;
      out << "f " << a << ' ' << b << ' ' << e << '\n';
      out << "f " << a << ' ' << e << ' ' << c << '\n';
    }
  }
  finish(out, path);
}

ObjMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path + "'");
  ObjMesh m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      std::array<double, 3> v{};
      if (!(ls >> v[0] >> v[1] >> v[2])) throw IOError(path + ":" + std::to_string(lineno) + ": bad vertex");
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> t{};
      if (!(ls >> t[0] >> t[1] >> t[2])) throw IOError(path + ":" + std::to_string(lineno) + ": bad face");
      for (int& k : t) {
        if (k < 1 || k > static_cast<int>(m.vertices.size()))
          throw IOError(path + ":" + std::to_string(lineno) + ": face index out of range");
        --k;
      }
      m.triangles.push_back(t);
    } else {
      throw IOError(path + ":" + std::to_string(lineno) + ": unsupported record '" + tag + "'");
    }
  }
  return m;
}

std::string report_csv(const RunReport& r) {
  std::ostringstream os;
  for (std::size_t k = 0; k < kReportColumns.size(); ++k) os << (k ? "," : "") << kReportColumns[k];
  os << '\n';
  for (const auto& s : r.stages) {
    os << s.q << ',' << format_double(s.delta_q) << ',' << format_double(s.lambda_q) << ','
       << format_double(s.Lambda_q) << ',' << format_double(s.report.deficit_before) << ','
       << format_double(s.report.deficit_after) << ',' << format_double(s.report.c1_increment) << ','
       << format_double(s.report.c2_estimate) << ',' << format_double(s.report.wall_ms) << '\n';
  }
  return os.str();
}

nlohmann::ordered_json report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["note"] = r.note;
  j["config"] = config_json(r.config);
  j["beta"] = {r.config.schedule.beta().num, r.config.schedule.beta().den};
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto& s : r.stages) {
    const StageReport& sr = s.report;
    nlohmann::ordered_json e;
    e["q"] = s.q;
    e["delta_q"] = s.delta_q;
    e["delta_next"] = s.delta_next;
    e["lambda_q"] = s.lambda_q;
    e["Lambda_q"] = s.Lambda_q;
    e["eta_q"] = s.eta_q;
    e["lambda_in"] = s.lambda_in;
    e["c2_prediction"] = s.c2_prediction;
    e["ell"] = sr.ell;
    e["deficit_before"] = sr.deficit_before;
    e["deficit_after"] = sr.deficit_after;
    e["closeness_before"] = sr.closeness_before;
    e["closeness_after"] = sr.closeness_after;
    e["mollification_floor"] = sr.mollification_floor;
    e["fast_error"] = sr.fast_error;
    e["frequencies"] = sr.frequencies;
    e["top_exponent"] = sr.top_exponent;
    e["c2_estimate"] = sr.c2_estimate;
    e["c1_increment"] = sr.c1_increment;
    e["cancellation_residual"] = sr.cancellation_residual;
    e["cancellation_matrix_residual"] = sr.cancellation_matrix_residual;
    e["kaellen_history"] = sr.kaellen_history;
    e["kaellen_lambda0_hat"] = sr.kaellen_lambda0_hat;
    e["min_amplitude"] = sr.min_amplitude;
    e["min_adjusted_amplitude"] = sr.min_adjusted_amplitude;
    e["gram_condition"] = sr.gram_condition;
    e["wall_ms"] = sr.wall_ms;
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& d : sr.per_step) steps.push_back(step_json(d));
    e["steps"] = std::move(steps);
    stages.push_back(std::move(e));
  }
  j["stages"] = std::move(stages);
  j["deficit_trajectory"] = r.deficit_trajectory;
  j["c1_increments"] = r.c1_increments;
  j["c0_distance"] = r.c0_distance;
  nlohmann::ordered_json h;
  h["alphas"] = r.holder.alphas;
  h["seminorm_last"] = r.holder.seminorm_last;
  h["increments"] = r.holder.increments;
  h["alpha_hat"] = r.holder.alpha_hat ? nlohmann::ordered_json(*r.holder.alpha_hat) : nlohmann::ordered_json();
  j["holder"] = std::move(h);
  j["error"] = r.error ? nlohmann::ordered_json(*r.error) : nlohmann::ordered_json();
  j["failed_stage"] = r.failed_stage;
  return j;
}

void write_report_csv(const RunReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << report_csv(report);
  finish(out, path);
}

void write_report_json(const RunReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << report_json(report).dump(2) << '\n';
  finish(out, path);
}

void export_report(const RunReport& report, const std::string& stem) {
  write_report_csv(report, stem + ".csv");
  write_report_json(report, stem + ".json");
}

}  // namespace corrugate
