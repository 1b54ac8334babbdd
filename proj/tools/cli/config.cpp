#include "config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace dualmpc::cli {

namespace {

using nlohmann::json;

// Reads one JSON object, tracking its dotted path for error messages and
// rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw ConfigError(path_ + " must be an object");
    doc_ = &doc;
  }

  ~Section() noexcept(false) {
    if (!doc_ || std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : doc_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown field " + field(key));
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!doc_) return nullptr;
    auto it = doc_->find(key);
    return it == doc_->end() ? nullptr : &*it;
  }

  const json& sub(const std::string& key) {
    static const json null_json;
    const json* v = find(key);
    return v ? *v : null_json;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key) + " must be an integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key) + " must be true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void vec(const std::string& key, Vector& out, int size) {
    if (const json* v = find(key)) {
      if (!v->is_array() || static_cast<int>(v->size()) != size)
        throw ConfigError(field(key) + " must be an array of " + std::to_string(size) + " numbers");
      out.resize(size);
      for (int i = 0; i < size; ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(field(key) + " must contain numbers only");
        out[i] = (*v)[i].get<double>();
      }
    }
  }

  void vec2(const std::string& key, Eigen::Vector2d& out) {
    Vector tmp = out;
    vec(key, tmp, 2);
    out = tmp;
  }

 private:
  const json* doc_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

json vec_json(const Eigen::Ref<const Vector>& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void validate(const RunConfig& cfg) {
  try {
    cfg.sim.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  if (cfg.out_dir.empty()) throw ConfigError("run.out must not be empty");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  SimConfig& s = cfg.sim;
  Section root(doc, "");
  {
    Section sec(root.sub("scenario"), "scenario");
    sec.vec2("p_true", s.scenario.p_true);
    sec.number("delta", s.scenario.delta);
    sec.vec2("x0", s.scenario.x0);
    sec.vec2("p_hat_init", s.p_hat_init);
  }
  {
    Section sec(root.sub("noise"), "noise");
    sec.number("nu", s.noise.nu);
    if (const json* v = sec.find("seed")) {
      if (!v->is_number_unsigned()) throw ConfigError("noise.seed must be a non-negative integer");
      s.noise.seed = v->get<std::uint64_t>();
    }
  }
  {
    Section sec(root.sub("estimator"), "estimator");
    EstimatorConfig& e = s.estimator;
    sec.integer("window_length", e.window_length);
    sec.integer("iters_per_step", e.iters_per_step);
    sec.number("damping", e.damping);
    sec.number("full_solve_damping", e.full_solve_damping);
    sec.number("full_solve_tol", e.full_solve_tol);
    sec.integer("full_solve_max_iters", e.full_solve_max_iters);
    sec.integer("multistart_count", e.multistart_count);
    sec.number("jitter_radius", e.jitter_radius);
    Section pen(sec.sub("penalty"), "estimator.penalty");
    std::string kind = "zero";
    pen.text("kind", kind);
    if (kind == "zero") {
      e.penalty = PenaltyConfig::zero();
    } else if (kind == "quadratic_box") {
      Vector lo, hi;
      double weight = 1.0;
      pen.vec("lower", lo, 2);
      pen.vec("upper", hi, 2);
      pen.number("weight", weight);
      if (lo.size() != 2 || hi.size() != 2)
        throw ConfigError("estimator.penalty.lower and estimator.penalty.upper are required for quadratic_box");
      e.penalty = PenaltyConfig::quadratic_box(lo, hi, weight);
    } else {
      throw ConfigError("estimator.penalty.kind must be \"zero\" or \"quadratic_box\"");
    }
  }
  {
    Section sec(root.sub("feedback"), "feedback");
    sec.number("gain", s.feedback.gain);
    sec.number("r_sat", s.feedback.r_sat);
    sec.number("u_max", s.feedback.u_max);
  }
  s.feedback.delta = s.scenario.delta;
  {
    Section sec(root.sub("mpc"), "mpc");
    sec.number("delta_prime", s.mpc.delta_prime);
    sec.number("mu", s.mpc.mu);
    sec.number("control_cost_weight", s.mpc.control_cost_weight);
    sec.integer("ring_samples", s.mpc.ring_samples);
    sec.integer("refine_iters", s.mpc.refine_iters);
  }
  {
    Section sec(root.sub("lyapunov"), "lyapunov");
    sec.number("lambda", s.lyapunov.lambda);
  }
  {
    Section sec(root.sub("run"), "run");
    sec.integer("steps", s.steps);
    std::string mode = to_string(s.mode);
    sec.text("mode", mode);
    try {
      s.mode = mode_from_string(mode);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("run.mode: ") + ex.what());
    }
    sec.boolean("oracle", s.oracle);
    if (const json* v = sec.find("burn_in"); v && !v->is_null()) {
      if (!v->is_number_integer()) throw ConfigError("run.burn_in must be an integer or null");
      s.burn_in = v->get<int>();
    }
    std::string warmup = "kappa";
    sec.text("warmup", warmup);
    if (warmup == "kappa") {
      s.warmup = WarmupKind::kKappa;
    } else if (warmup == "arc") {
      s.warmup = WarmupKind::kArc;
    } else {
      throw ConfigError("run.warmup must be \"kappa\" or \"arc\"");
    }
    sec.text("out", cfg.out_dir);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& ex) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + ex.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  const SimConfig& s = cfg.sim;
  const EstimatorConfig& e = s.estimator;
  json penalty = {{"kind", "zero"}};
  if (e.penalty.kind == PenaltyConfig::Kind::kQuadraticBox) {
    penalty = {{"kind", "quadratic_box"},
               {"lower", vec_json(e.penalty.lower)},
               {"upper", vec_json(e.penalty.upper)},
               {"weight", e.penalty.weight}};
  }
  return {
      {"scenario",
       {{"p_true", vec_json(s.scenario.p_true)},
        {"delta", s.scenario.delta},
        {"x0", vec_json(s.scenario.x0)},
        {"p_hat_init", vec_json(s.p_hat_init)}}},
      {"noise", {{"nu", s.noise.nu}, {"seed", s.noise.seed}}},
      {"estimator",
       {{"window_length", e.window_length},
        {"iters_per_step", e.iters_per_step},
        {"damping", e.damping},
        {"full_solve_damping", e.full_solve_damping},
        {"full_solve_tol", e.full_solve_tol},
        {"full_solve_max_iters", e.full_solve_max_iters},
        {"multistart_count", e.multistart_count},
        {"jitter_radius", e.jitter_radius},
        {"penalty", penalty}}},
      {"feedback", {{"gain", s.feedback.gain}, {"r_sat", s.feedback.r_sat}, {"u_max", s.feedback.u_max}}},
      {"mpc",
       {{"delta_prime", s.mpc.delta_prime},
        {"mu", s.mpc.mu},
        {"control_cost_weight", s.mpc.control_cost_weight},
        {"ring_samples", s.mpc.ring_samples},
        {"refine_iters", s.mpc.refine_iters}}},
      {"lyapunov", {{"lambda", s.lyapunov.lambda}}},
      {"run",
       {{"steps", s.steps},
        {"mode", to_string(s.mode)},
        {"oracle", s.oracle},
        {"burn_in", s.burn_in ? json(*s.burn_in) : json(nullptr)},
        {"warmup", s.warmup == WarmupKind::kArc ? "arc" : "kappa"},
        {"out", cfg.out_dir}}},
  };
}

void apply_override(json& doc, const std::string& dotted_path, const std::string& value) {
  if (dotted_path.empty()) throw ConfigError("override with an empty path");
  json* node = &doc;
  std::stringstream ss(dotted_path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("override path " + dotted_path + " crosses a non-object");
    node = &(*node)[parts[i]];
  }
  if (node->is_null()) *node = json::object();
  if (!node->is_object()) throw ConfigError("override path " + dotted_path + " crosses a non-object");
  json parsed = json::parse(value, nullptr, false);
  (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
}

std::string config_hash(const RunConfig& cfg) {
  json doc = to_json(cfg);
  doc["noise"].erase("seed");
  doc["run"].erase("out");
  // FNV-1a, so the value does not depend on the standard library.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace dualmpc::cli
