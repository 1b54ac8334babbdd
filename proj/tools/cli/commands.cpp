#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "dualmpc/trace_io.hpp"

namespace dualmpc::cli {

namespace {

using nlohmann::json;

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(what + ": expected a non-negative integer, got \"" + std::string(text) + "\"");
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Every index is visited
// even when some fail; the first exception is rethrown at the end.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  auto body = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::uint64_t> seeds_of(const SeedRange& r) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = r.first;; ++s) {
    out.push_back(s);
    if (s == r.last) break;
  }
  return out;
}

int report(const std::exception& ex, int code) {
  std::cerr << "error: " << ex.what() << '\n';
  return code;
}

json brief(const RunSummary& s) {
  return {{"final_error", s.final_error},
          {"max_post_burn_in_error", s.max_post_burn_in_error},
          {"lammin_min", s.lammin_min},
          {"lammin_max", s.lammin_max},
          {"lammin_below_1e-3_rate", s.lammin_below_1e3_rate},
          {"feasibility_rate", s.feasibility_rate},
          {"error", s.error ? json(*s.error) : json(nullptr)}};
}

}  // namespace

SeedRange parse_seed_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) {
    std::uint64_t s = parse_u64(text, "seed range");
    return {s, s};
  }
  SeedRange r{parse_u64(std::string_view(text).substr(0, dots), "seed range"),
              parse_u64(std::string_view(text).substr(dots + 2), "seed range")};
  if (r.last < r.first) throw ConfigError("seed range " + text + " is empty");
  return r;
}

RunConfig resolve_config(const CommonOptions& opts, const std::optional<std::string>& mode) {
  json doc = json::object();
  if (opts.config_path) {
    std::ifstream is(*opts.config_path);
    if (!is) throw ConfigError("cannot open config file " + opts.config_path->string());
    try {
      doc = json::parse(is);
    } catch (const json::parse_error& ex) {
      throw ConfigError("config file " + opts.config_path->string() + " is not valid JSON: " + ex.what());
    }
  }
  for (const auto& [path, value] : opts.overrides) apply_override(doc, path, value);
  if (opts.steps) doc["run"]["steps"] = *opts.steps;
  if (opts.oracle) doc["run"]["oracle"] = *opts.oracle;
  if (opts.out) doc["run"]["out"] = *opts.out;
  if (mode) doc["run"]["mode"] = *mode;
  return parse_config(doc);
}

std::filesystem::path run_directory(const RunConfig& cfg) {
  return std::filesystem::path(cfg.out_dir) /
         (std::string(to_string(cfg.sim.mode)) + "_" + std::to_string(cfg.sim.noise.seed));
}

RunSummary run_and_write(const RunConfig& cfg) {
  SimTrace trace = run(cfg.sim);
  trace.config_hash = config_hash(cfg);
  RunSummary summary = summarize(trace, cfg.sim);

  auto dir = run_directory(cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  try {
    write_trace_csv(dir / "trace.csv", trace);
  } catch (const std::runtime_error& ex) {
    throw IoError(ex.what());
  }
  write_text(dir / "summary.json", summary_to_json(summary));
  write_text(dir / "config.echo.json", to_json(cfg).dump(2) + "\n");
  return summary;
}

int run_command(const RunOptions& opts) {
  RunConfig base;
  std::vector<std::uint64_t> seeds;
  try {
    base = resolve_config(opts.common, opts.mode);
    if (opts.seed && opts.sweep) throw ConfigError("--seed and --seed-sweep are mutually exclusive");
    if (opts.sweep) {
      seeds = seeds_of(*opts.sweep);
    } else {
      seeds.push_back(opts.seed.value_or(base.sim.noise.seed));
    }
  } catch (const ConfigError& ex) {
    return report(ex, kConfigInvalid);
  }

  std::vector<RunSummary> summaries(seeds.size());
  try {
    parallel_for(seeds.size(), opts.common.jobs, [&](std::size_t i) {
      RunConfig cfg = base;
      cfg.sim.noise.seed = seeds[i];
      summaries[i] = run_and_write(cfg);
    });
  } catch (const IoError& ex) {
    return report(ex, kIoFailed);
  } catch (const std::exception& ex) {
    return report(ex, kRunFailed);
  }

  int code = kOk;
  for (const auto& s : summaries) {
    std::cout << s.mode << " seed " << s.seed << ": final error " << s.final_error << ", feasibility "
              << s.feasibility_rate << ", min lambda " << s.lammin_min;
    if (s.gamma_hat) std::cout << ", gamma " << *s.gamma_hat;
    std::cout << '\n';
    if (s.error) {
      std::cerr << "error: seed " << s.seed << " aborted: " << *s.error << '\n';
      code = kRunFailed;
    }
  }
  return code;
}

int compare_command(const CompareOptions& opts) {
  RunConfig base;
  std::vector<std::uint64_t> seeds;
  try {
    base = resolve_config(opts.common, std::nullopt);
    seeds = seeds_of(opts.seeds);
  } catch (const ConfigError& ex) {
    return report(ex, kConfigInvalid);
  }

  const Mode modes[2] = {Mode::kNominalOnly, Mode::kObservabilitySeeking};
  std::vector<RunSummary> summaries(2 * seeds.size());
  try {
    parallel_for(summaries.size(), opts.common.jobs, [&](std::size_t i) {
      RunConfig cfg = base;
      cfg.sim.mode = modes[i % 2];
      cfg.sim.noise.seed = seeds[i / 2];
      summaries[i] = run_and_write(cfg);
    });
  } catch (const IoError& ex) {
    return report(ex, kIoFailed);
  } catch (const std::exception& ex) {
    return report(ex, kRunFailed);
  }

  json per_seed = json::array();
  int active_better = 0;
  double sum_nominal = 0.0, sum_active = 0.0;
  bool aborted = false;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const RunSummary& nom = summaries[2 * k];
    const RunSummary& act = summaries[2 * k + 1];
    aborted = aborted || nom.error || act.error;
    if (act.final_error < nom.final_error) ++active_better;
    sum_nominal += nom.final_error;
    sum_active += act.final_error;
    per_seed.push_back({{"seed", seeds[k]}, {"nominal-only", brief(nom)}, {"observability-seeking", brief(act)}});
  }
  const double n = static_cast<double>(seeds.size());
  json doc = {{"config_hash", config_hash(base)},
              {"seeds", per_seed},
              {"mean_final_error", {{"nominal-only", sum_nominal / n}, {"observability-seeking", sum_active / n}}},
              {"active_better_count", active_better},
              {"seed_count", seeds.size()}};
  try {
    std::error_code ec;
    std::filesystem::create_directories(base.out_dir, ec);
    if (ec) throw IoError("cannot create " + base.out_dir + ": " + ec.message());
    write_text(std::filesystem::path(base.out_dir) / "comparison.json", doc.dump(2) + "\n");
  } catch (const IoError& ex) {
    return report(ex, kIoFailed);
  }
  std::cout << "mean final error: nominal-only " << sum_nominal / n << ", observability-seeking " << sum_active / n
            << " (active lower on " << active_better << "/" << seeds.size() << " seeds)\n";
  return aborted ? kRunFailed : kOk;
}

}  // namespace dualmpc::cli
