#include "qbs/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbs/config.hpp"
#include "qbs/engine.hpp"
#include "qbs/moments.hpp"
#include "qbs/oracle.hpp"
#include "qbs/report.hpp"

namespace qbs::cli {

namespace {

using nlohmann::ordered_json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void apply_overrides(ModelConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override '" + o + "' is not key=value");
    apply_config_entry(config, o.substr(0, eq), o.substr(eq + 1));
  }
}

ModelConfig load_with_overrides(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides) {
  ModelConfig config = load_config(path);
  apply_overrides(config, overrides);
  return config;
}

// Runs `body`, mapping the library's exception types onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.key().empty()) err << " [" << e.key() << "]";
    err << ": " << e.what() << '\n';
  } catch (const oracle::StabilityError& e) {
    err << "stability abort: " << e.what() << "; reduce dt_pde below " << e.dt_pde()
        << " or coarsen the grid so that dx exceeds |f|\n";
    return kUnstable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kFailure;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string density_csv(const oracle::DensityGrid& g) {
  std::string s = "cell_left,cell_right,density\n";
  for (std::size_t i = 0; i < g.cells(); ++i) {
    s += report::format_double(g.left(i)) + ',' + report::format_double(g.left(i) + g.width()) +
         ',' + report::format_double(g.values[i]) + '\n';
  }
  return s;
}

}  // namespace

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("QBS_OUT_DIR");
  if (env != nullptr && *env != '\0') return env;
  return "qbs_out";
}

int cmd_moments(const MomentsOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.max_order < 2 || opts.max_order > 12) {
      throw std::invalid_argument("--max-order must be between 2 and 12");
    }
    const ModelConfig config = load_with_overrides(opts.config_path, opts.overrides);
    config.validate();
    std::ostringstream s;
    s << "order,variable,polynomial,value\n";
    if (!config.is_rotation()) {
      // H_i is location independent: the polynomial is the constant itself.
      for (int i = 0; i <= opts.max_order; ++i) {
        const double h = translation_moment(i, config.eps_transform);
        s << i << ",H," << fmt("%.17g", h) << ',' << fmt("%.7g", h) << '\n';
      }
    } else {
      for (auto v : {MomentVariable::X, MomentVariable::Spread}) {
        const MomentSet set = solve_rotation_moments(v, config.eps_transform, opts.max_order);
        for (int n = 0; n <= opts.max_order; ++n) {
          const auto& poly = set.polys[static_cast<std::size_t>(n)];
          s << n << ',' << to_string(v) << ',' << poly.to_string() << ','
            << fmt("%.7g", poly.evaluate(config.x0, config.spread_start())) << '\n';
        }
      }
    }
    out << s.str();
    return static_cast<int>(kOk);
  });
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ModelConfig config = load_with_overrides(opts.config_path, opts.overrides);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.paths) config.n_paths = *opts.paths;
    if (opts.steps) config.n_steps = *opts.steps;
    config.validate();
    if (opts.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    const auto dir = opts.out_dir.value_or(default_out_dir());

    report::write_manifest(config, fit_kernel(config), dir, "running");
    report::append_run_log(dir, "start");
    const SimOutput sim = simulate(config, ExecOptions{opts.threads});
    report::emit(sim, dir);
    report::append_run_log(dir, "end");

    const auto dist = report::final_distribution(sim);
    out << "wrote " << dir.string() << ": " << config.n_paths << " paths, " << config.n_steps
        << " steps, ln(x_T) mean " << fmt("%.6g", dist.mean.value) << " variance "
        << fmt("%.6g", dist.variance.value) << " skewness " << fmt("%.4g", dist.skewness.value)
        << " (se " << fmt("%.3g", dist.skewness.std_error) << ")\n";
    return static_cast<int>(kOk);
  });
}

int cmd_oracle(const OracleOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ModelConfig config = load_with_overrides(opts.config_path, opts.overrides);
    oracle::OracleRequest req;
    req.truncation = opts.truncation;
    req.cells = opts.grid_cells;
    req.t_final = opts.t_final;
    req.reference = opts.reference;
    req.exec.threads = opts.threads;
    const oracle::OracleRun run = oracle::run_oracle(config, req);
    const oracle::FpProblem& p = run.problem;
    const oracle::DensityGrid& pde = run.pde;
    const auto& cmp = run.comparison;
    const std::string reference_name = run.reference_name;

    const auto dir = opts.out_dir.value_or(default_out_dir());
    std::filesystem::create_directories(dir);
    write_text(dir / "density.csv", density_csv(pde));
    ordered_json j;
    j["l1"] = cmp.l1;
    j["ks"] = cmp.ks;
    j["K"] = p.truncation;
    j["reference"] = reference_name;
    j["grid"] = {{"lo", p.lo}, {"hi", p.hi}, {"cells", p.cells}};
    j["t_start"] = p.t_start;
    j["t_final"] = p.t_final;
    j["dt_pde"] = pde.dt_pde;
    j["time_steps"] = pde.time_steps;
    j["mass_drift"] = pde.mass_drift;
    j["coefficients"] = {p.terms.c[2], p.terms.c[3], p.terms.c[4]};
    j["config_hash"] = report::config_hash(config);
    write_text(dir / "comparison.json", j.dump(2) + "\n");

    out << "K=" << p.truncation << " vs " << reference_name << ": l1 " << fmt("%.6g", cmp.l1)
        << " ks " << fmt("%.6g", cmp.ks) << " (" << p.cells << " cells, dt_pde "
        << fmt("%.3g", pde.dt_pde) << ")\n";
    return static_cast<int>(kOk);
  });
}

namespace {

struct RunSummary {
  ordered_json summary;
  oracle::DensityGrid hist;  // over ln(x_T)
};

RunSummary load_run(const std::filesystem::path& dir) {
  RunSummary r;
  const auto spath = dir / "summary.json";
  try {
    r.summary = ordered_json::parse(read_text(spath));
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error("malformed " + spath.string() + ": " + e.what());
  }
  for (const char* key : {"mean", "variance", "skewness", "excess_kurtosis"}) {
    if (!r.summary.contains("log_price") || !r.summary["log_price"].contains(key)) {
      throw std::runtime_error("schema mismatch in " + spath.string() + ": missing log_price." +
                               key);
    }
  }

  const auto hpath = dir / "hist.csv";
  std::istringstream in(read_text(hpath));
  std::string line;
  if (!std::getline(in, line) || line != "bucket_left,bucket_right,count,probability") {
    throw std::runtime_error("schema mismatch in " + hpath.string() + ": unexpected header");
  }
  std::vector<double> probs;
  double lo = 0.0, hi = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double l, rr, prob;
    long long count;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lld,%lf", &l, &rr, &count, &prob) != 4) {
      throw std::runtime_error("schema mismatch in " + hpath.string() + ": bad row '" + line + "'");
    }
    if (probs.empty()) lo = l;
    hi = rr;
    probs.push_back(prob);
  }
  if (probs.empty()) throw std::runtime_error("empty histogram in " + hpath.string());
  r.hist.lo = lo;
  r.hist.hi = hi;
  r.hist.values = std::move(probs);
  return r;
}

}  // namespace

int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunSummary a = load_run(opts.dir_a);
    const RunSummary b = load_run(opts.dir_b);
    std::ostringstream s;
    s << "moment,a,b,delta,delta_se,flag\n";
    for (const char* key : {"mean", "variance", "skewness", "excess_kurtosis"}) {
      const auto& ea = a.summary["log_price"][key];
      const auto& eb = b.summary["log_price"][key];
      const double va = ea["value"].get<double>();
      const double vb = eb["value"].get<double>();
      const double se = std::hypot(ea["std_error"].get<double>(), eb["std_error"].get<double>());
      const double delta = vb - va;
      const bool flag = se > 0.0 ? std::abs(delta) > 3.0 * se : delta != 0.0;
      s << key << ',' << fmt("%.8g", va) << ',' << fmt("%.8g", vb) << ',' << fmt("%.8g", delta)
        << ',' << fmt("%.3g", se) << ',' << (flag ? "significant" : "-") << '\n';
    }
    const auto cmp = oracle::compare_densities(a.hist, b.hist);
    s << "hist_l1," << fmt("%.8g", cmp.l1) << "\nhist_ks," << fmt("%.8g", cmp.ks) << '\n';
    out << s.str();
    return static_cast<int>(kOk);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal Black-Scholes particle simulation lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", report::kToolVersion);

  MomentsOptions mo;
  auto* moments = app.add_subcommand("moments", "Print blur-kernel moments for a config");
  moments->add_option("config", mo.config_path, "Config file (key=value)")->required();
  moments->add_option("--max-order", mo.max_order, "Highest moment order")->capture_default_str();
  moments->add_option("--set", mo.overrides, "Override a config key (key=value)");

  SimulateOptions so;
  std::string so_out;
  auto* sim = app.add_subcommand("simulate", "Run the particle engine and write reports");
  sim->add_option("config", so.config_path, "Config file (key=value)")->required();
  sim->add_option("--seed", so.seed, "Master seed");
  sim->add_option("--paths", so.paths, "Number of paths");
  sim->add_option("--steps", so.steps, "Number of time steps");
  sim->add_option("--out-dir", so_out, "Output directory (default $QBS_OUT_DIR or qbs_out)");
  sim->add_option("--threads", so.threads, "Worker threads; 1 is the serial reference")
      ->capture_default_str();
  sim->add_option("--set", so.overrides, "Override a config key (key=value)");

  OracleOptions oo;
  std::string oo_out;
  std::string oo_ref = "auto";
  auto* orc = app.add_subcommand("oracle", "Solve the truncated Fokker-Planck equation");
  orc->add_option("config", oo.config_path, "Config file (key=value)")->required();
  orc->add_option("--truncation,-K", oo.truncation, "Truncation order K")->capture_default_str();
  orc->add_option("--grid-cells", oo.grid_cells, "PDE grid cells");
  orc->add_option("--t-final", oo.t_final, "Final time (default n_steps * dt)");
  orc->add_option("--reference", oo_ref, "auto | lognormal | particles")
      ->check(CLI::IsMember({"auto", "lognormal", "particles"}));
  orc->add_option("--out-dir", oo_out, "Output directory (default $QBS_OUT_DIR or qbs_out)");
  orc->add_option("--threads", oo.threads, "Worker threads for the particle reference");
  orc->add_option("--set", oo.overrides, "Override a config key (key=value)");

  CompareOptions co;
  auto* cmp = app.add_subcommand("compare", "Diff two simulate output directories");
  cmp->add_option("dir_a", co.dir_a)->required();
  cmp->add_option("dir_b", co.dir_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  if (moments->parsed()) return cmd_moments(mo, out, err);
  if (sim->parsed()) {
    if (!so_out.empty()) so.out_dir = so_out;
    return cmd_simulate(so, out, err);
  }
  if (orc->parsed()) {
    if (!oo_out.empty()) oo.out_dir = oo_out;
    oo.reference = oo_ref == "lognormal"   ? oracle::Reference::Lognormal
                   : oo_ref == "particles" ? oracle::Reference::Particles
                                           : oracle::Reference::Auto;
    return cmd_oracle(oo, out, err);
  }
  return cmd_compare(co, out, err);
}

}  // namespace qbs::cli
