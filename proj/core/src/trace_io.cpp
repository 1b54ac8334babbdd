#include "dualmpc/trace_io.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

namespace dualmpc {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("trace.csv: cannot parse number '" + s + "'");
  return v;
}

void put2(std::ostream& os, const Vector& v) {
  os << ',' << format_double(v[0]) << ',' << format_double(v[1]);
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

const std::vector<std::string>& trace_csv_header() {
  static const std::vector<std::string> header{
      "t",     "x1",     "x2",     "x01",   "x02",   "y1",    "y2", "u1", "u2", "uobs1",  "uobs2",
      "phat1", "phat2",  "err",    "lammin", "delta", "feasible", "V", "W",  "budget", "pstar1", "pstar2"};
  return header;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  const auto& header = trace_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const TraceRow& r : trace.rows) {
    if (r.x.size() != 2 || r.u.size() != 2 || r.p_hat.size() != 2)
      throw std::invalid_argument("write_trace_csv: the CSV schema is two-dimensional");
    os << r.t;
    put2(os, r.x);
    put2(os, r.x0);
    put2(os, r.y);
    put2(os, r.u);
    put2(os, r.u_obs);
    put2(os, r.p_hat);
    os << ',' << format_double(r.err) << ',' << format_double(r.lammin) << ',' << format_double(r.delta) << ','
       << (r.feasible ? 1 : 0) << ',' << format_double(r.V) << ',' << format_double(r.W) << ','
       << format_double(r.budget);
    put2(os, r.p_star ? *r.p_star : Vector(Eigen::Vector2d(nan, nan)));
    os << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(os, trace);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace.csv: empty input");
  {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols != trace_csv_header()) throw std::runtime_error("trace.csv: unexpected header");
  }
  const std::size_t ncol = trace_csv_header().size();
  std::vector<TraceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(parse_double(c));
    if (f.size() != ncol) throw std::runtime_error("trace.csv: row with wrong column count");
    auto v2 = [&](std::size_t i) { return Vector(Eigen::Vector2d(f[i], f[i + 1])); };
    TraceRow r;
    r.t = static_cast<long>(f[0]);
    r.x = v2(1);
    r.x0 = v2(3);
    r.y = v2(5);
    r.u = v2(7);
    r.u_obs = v2(9);
    r.p_hat = v2(11);
    r.err = f[13];
    r.lammin = f[14];
    r.delta = f[15];
    r.feasible = f[16] != 0.0;
    r.V = f[17];
    r.W = f[18];
    r.budget = f[19];
    if (!std::isnan(f[20])) r.p_star = v2(20);
    r.warmup = std::isnan(r.delta);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_trace_csv(is);
}

const std::vector<std::string>& summary_json_keys() {
  static const std::vector<std::string> keys{"mode",
                                             "seed",
                                             "config_hash",
                                             "steps",
                                             "burn_in",
                                             "nu",
                                             "final_error",
                                             "max_post_burn_in_error",
                                             "gamma_hat",
                                             "gamma_all",
                                             "gamma_95",
                                             "recursion_fraction",
                                             "ultimate_bound",
                                             "ultimate_bound_ok",
                                             "feasibility_rate",
                                             "lammin_min",
                                             "lammin_max",
                                             "lammin_below_1e-3_rate",
                                             "constraint_violations",
                                             "infeasible_steps",
                                             "linear_solve_failures",
                                             "oracle_nonconverged",
                                             "lyapunov_increases",
                                             "error"};
  return keys;
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  j["config_hash"] = s.config_hash;
  j["steps"] = s.steps;
  j["burn_in"] = s.burn_in;
  j["nu"] = s.nu;
  j["final_error"] = s.final_error;
  j["max_post_burn_in_error"] = s.max_post_burn_in_error;
  j["gamma_hat"] = optional_json(s.gamma_hat);
  j["gamma_all"] = optional_json(s.gamma_all);
  j["gamma_95"] = optional_json(s.gamma_95);
  j["recursion_fraction"] = optional_json(s.recursion_fraction);
  j["ultimate_bound"] = optional_json(s.ultimate_bound);
  j["ultimate_bound_ok"] = optional_json(s.ultimate_bound_ok);
  j["feasibility_rate"] = s.feasibility_rate;
  j["lammin_min"] = s.lammin_min;
  j["lammin_max"] = s.lammin_max;
  j["lammin_below_1e-3_rate"] = s.lammin_below_1e3_rate;
  j["constraint_violations"] = s.constraint_violations;
  j["infeasible_steps"] = s.infeasible_steps;
  j["linear_solve_failures"] = s.linear_solve_failures;
  j["oracle_nonconverged"] = s.oracle_nonconverged;
  j["lyapunov_increases"] = s.lyapunov_increases;
  j["error"] = optional_json(s.error);
  return j.dump(2);
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& summary) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << summary_to_json(summary) << '\n';
}

}  // namespace dualmpc
