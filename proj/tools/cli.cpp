#include "pisd/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pisd/harness.hpp"
#include "pisd/io.hpp"
#include "pisd/validation.hpp"

#ifndef PISD_VERSION
#define PISD_VERSION "unknown"
#endif

namespace pisd::cli {

namespace {

using nlohmann::json;

// Reads key = value files through CLI11, and run manifests (JSON) by taking
// their "config" object as the key/value set.
class ConfigReader : public CLI::ConfigBase {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream is(text);
      return CLI::ConfigBase::from_config(is);
    }
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    const json& flat = doc.contains("config") ? doc.at("config") : doc;
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : flat.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (value.is_string()) {
        item.inputs.push_back(value.get<std::string>());
      } else if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      } else {
        item.inputs.push_back(value.dump());
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct Settings {
  double s = 0.5;
  double j_ratio = 1.0;
  double bz = 1.0;
  double alpha = 0.5;
  double t_min = 0.1;
  double t_max = 10.0;
  int points = 50;
  std::vector<double> temperatures;
  std::string out;
  std::string eigen_out;
  std::string model = "eigen-overlap";
  int order = 2;
  double dt_ns = 5e-6;
  double t_equil_ns = 1.0;
  double t_average_ns = 2.0;
  int realizations = 5;
  int stride = 10;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  double max_rejected_fraction = 1e-3;
  std::string mode = "both";
  bool paper_scale = false;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t resolve_seed(const Settings& st) {
  if (st.seed) return *st.seed;
  if (const char* env = std::getenv("PISD_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw std::invalid_argument("PISD_SEED is not an unsigned integer: '" + s + "'");
    }
    return v;
  }
  return 1;
}

SpinSystemSpec make_spec(const Settings& st) {
  return SpinSystemSpec::with_exchange_ratio(Spin::from_value(st.s), st.j_ratio, st.bz, st.alpha);
}

std::vector<double> temperature_grid(const Settings& st) {
  if (!st.temperatures.empty()) return st.temperatures;
  return log_spaced(st.t_min, st.t_max, st.points);
}

// Everything that determines the output bytes, as the flat key set the
// config reader accepts.
json config_echo(const std::string& subcommand, const Settings& st, std::uint64_t seed) {
  json c;
  c["s"] = io::format_double(st.s);
  c["J-over-gmuBBz"] = io::format_double(st.j_ratio);
  c["Bz_T"] = io::format_double(st.bz);
  c["alpha"] = io::format_double(st.alpha);
  c["out"] = st.out;
  if (subcommand == "ed-sweep" || subcommand == "pisd-sweep" || subcommand == "diagnose") {
    if (st.temperatures.empty()) {
      c["Tmin"] = io::format_double(st.t_min);
      c["Tmax"] = io::format_double(st.t_max);
      c["points"] = std::to_string(st.points);
    } else {
      json ts = json::array();
      for (double t : st.temperatures) ts.push_back(io::format_double(t));
      c["temperatures"] = ts;
    }
  }
  if (subcommand == "ed-sweep" && !st.eigen_out.empty()) c["eigen-out"] = st.eigen_out;
  if (subcommand == "pisd-sweep") {
    c["model"] = st.model;
    c["order"] = std::to_string(st.order);
    c["dt_ns"] = io::format_double(st.dt_ns);
    c["t_equil_ns"] = io::format_double(st.t_equil_ns);
    c["t_average_ns"] = io::format_double(st.t_average_ns);
    c["realizations"] = std::to_string(st.realizations);
    c["stride"] = std::to_string(st.stride);
    c["max-rejected-fraction"] = io::format_double(st.max_rejected_fraction);
  }
  if (subcommand == "diagnose") c["mode"] = st.mode;
  c["seed"] = std::to_string(seed);
  return c;
}

struct Emitter {
  Emitter(std::string sub, const Settings& settings, std::uint64_t s)
      : subcommand(std::move(sub)), st(settings), seed(s), started(utc_now()) {}

  std::string subcommand;
  const Settings& st;
  std::uint64_t seed;
  std::string started;
  std::vector<std::string> outputs;

  // Writes `contents` to --out (or the stream) and records the path.
  void emit(const std::string& path, const std::string& contents, std::ostream& fallback) {
    if (path.empty()) {
      fallback << contents;
      return;
    }
    io::write_file_atomically(path, contents);
    outputs.push_back(path);
  }

  void write_manifest() const {
    if (st.out.empty()) return;
    json m;
    m["tool"] = "pisd";
    m["version"] = PISD_VERSION;
    m["subcommand"] = subcommand;
    m["seed"] = seed;
    m["config"] = config_echo(subcommand, st, seed);
    m["started_utc"] = started;
    m["finished_utc"] = utc_now();
    m["outputs"] = outputs;
    io::write_file_atomically(st.out + ".manifest.json", m.dump(2) + "\n");
  }
};

int cmd_ed_sweep(const Settings& st, std::uint64_t seed, std::ostream& out) {
  const auto spec = make_spec(st);
  const auto temps = temperature_grid(st);
  Emitter em{"ed-sweep", st, seed};
  std::ostringstream csv;
  io::write_ed_csv(csv, ed_sweep(spec, temps));
  em.emit(st.out, csv.str(), out);
  if (!st.eigen_out.empty()) {
    const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
    std::ostringstream values, vectors;
    io::write_eigensystem_csv(values, vectors, eig);
    em.emit(st.eigen_out, values.str(), out);
    em.emit(st.eigen_out + ".vectors.csv", vectors.str(), out);
  }
  em.write_manifest();
  return kExitOk;
}

int cmd_pisd_sweep(const Settings& st, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  SweepConfig cfg;
  cfg.spec = make_spec(st);
  const ModelKind kind = parse_model_kind(st.model);
  cfg.variant = {kind, ModelVariant{kind, 0}.has_order() ? st.order : 0};
  validate_variant(cfg.variant);
  cfg.temperatures = temperature_grid(st);
  cfg.dt = st.dt_ns * 1e-9;
  cfg.t_equil = st.t_equil_ns * 1e-9;
  cfg.t_average = st.t_average_ns * 1e-9;
  cfg.n_realizations = st.realizations;
  cfg.sample_stride = st.stride;
  cfg.seed = seed;
  cfg.threads = st.threads;
  cfg.max_rejected_fraction = st.max_rejected_fraction;
  cfg.validate();

  Emitter em{"pisd-sweep", st, seed};
  const SweepResult res = run_temperature_sweep(cfg);
  for (const auto& r : res.rows) {
    err << "T = " << r.temperature << " K: ";
    if (r.ok) {
      err << "<Sz>/hbar = " << r.sz_over_hbar << " +- " << r.std_error << " (" << r.wall_time_s << " s)\n";
    } else {
      err << "failed: " << r.failure << '\n';
    }
  }
  std::ostringstream csv;
  io::write_sweep_csv(csv, res);
  em.emit(st.out, csv.str(), out);
  em.write_manifest();
  if (res.all_failed()) {
    err << "error: the model could not be evaluated at any temperature\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_diagnose(const Settings& st, std::uint64_t seed, std::ostream& out) {
  const auto spec = make_spec(st);
  std::vector<CriterionMode> modes;
  if (st.mode == "both") {
    modes = {CriterionMode::Supremum, CriterionMode::Difference};
  } else {
    modes = {parse_criterion_mode(st.mode)};
  }
  std::vector<io::DiagnosticRow> rows;
  std::ostream& report = out;
  for (CriterionMode m : modes) {
    const double crossing = criterion_crossing_temperature(spec, m);
    report << criterion_name(m) << " criterion falls below 1 for T > " << crossing << " K\n";
    for (double t : temperature_grid(st)) rows.push_back({t, convergence_diagnostic(spec, t, m), m});
  }
  Emitter em{"diagnose", st, seed};
  if (!st.out.empty()) {
    std::ostringstream csv;
    io::write_diagnostic_csv(csv, rows);
    em.emit(st.out, csv.str(), out);
    em.write_manifest();
  }
  return kExitOk;
}

int cmd_validate(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_validation_suite(seed)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings st;
  CLI::App app{"Quantum-corrected two-spin dynamics: exact reference curves, stochastic sweeps, diagnostics",
               "pisd"};
  app.config_formatter(std::make_shared<ConfigReader>());
  app.set_config("--config", "", "Key = value file (same keys as the flags) or a run manifest");
  app.set_version_flag("--version", PISD_VERSION);
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--s", st.s, "Spin quantum number (1/2, 1, 3/2, ...)")->capture_default_str();
  app.add_option("--J-over-gmuBBz", st.j_ratio, "Exchange J in units of g mu_B B_z (negative: antiferromagnet)")
      ->capture_default_str();
  app.add_option("--Bz_T,--Bz", st.bz, "Field along z in tesla")->capture_default_str();
  app.add_option("--alpha", st.alpha, "Gilbert damping")->capture_default_str();
  app.add_option("--Tmin", st.t_min, "Lowest temperature of the log grid (K)")->capture_default_str();
  app.add_option("--Tmax", st.t_max, "Highest temperature of the log grid (K)")->capture_default_str();
  app.add_option("--points", st.points, "Number of grid temperatures")->capture_default_str();
  app.add_option("--temperatures", st.temperatures, "Explicit temperatures in K (overrides the grid)")
      ->delimiter(',');
  app.add_option("--out", st.out, "Output CSV; a run manifest is written beside it");
  app.add_option("--eigen-out", st.eigen_out, "ed-sweep: also write eigenvalues here (vectors to <path>.vectors.csv)");
  app.add_option("--model", st.model, "classical, series-exact, series-high-t, difference or eigen-overlap")
      ->capture_default_str();
  app.add_option("--order", st.order, "Truncation order N for the series and difference models")
      ->capture_default_str();
  app.add_option("--dt_ns", st.dt_ns, "Integration step (ns)")->capture_default_str();
  auto* eq = app.add_option("--t_equil_ns", st.t_equil_ns, "Equilibration time (ns)")->capture_default_str();
  auto* av = app.add_option("--t_average_ns", st.t_average_ns, "Averaging time (ns)")->capture_default_str();
  app.add_option("--realizations", st.realizations, "Independent trajectories per temperature")
      ->capture_default_str();
  app.add_option("--stride", st.stride, "Steps between samples")->capture_default_str();
  app.add_option("--seed", st.seed, "Base seed (default: $PISD_SEED, else 1)");
  app.add_option("--threads", st.threads, "Worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--max-rejected-fraction", st.max_rejected_fraction,
                 "Fail a temperature when more steps than this fraction leave the model domain")
      ->capture_default_str();
  app.add_option("--mode", st.mode, "diagnose: supremum, difference or both")->capture_default_str();
  app.add_flag("--paper-scale", st.paper_scale, "Use 5 ns equilibration and 10 ns averaging unless given");

  auto* ed = app.add_subcommand("ed-sweep", "Exact <Sz>(T) from diagonalisation");
  auto* sweep = app.add_subcommand("pisd-sweep", "Stochastic sweep with an effective-Hamiltonian model");
  auto* diag = app.add_subcommand("diagnose", "High-temperature series convergence criteria");
  auto* val = app.add_subcommand("validate", "Run the oracle-equivalence checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << PISD_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  if (st.paper_scale) {
    if (eq->count() == 0) st.t_equil_ns = 5.0;
    if (av->count() == 0) st.t_average_ns = 10.0;
  }

  try {
    const std::uint64_t seed = resolve_seed(st);
    if (ed->parsed()) return cmd_ed_sweep(st, seed, out);
    if (sweep->parsed()) return cmd_pisd_sweep(st, seed, out, err);
    if (diag->parsed()) return cmd_diagnose(st, seed, out);
    if (val->parsed()) return cmd_validate(seed, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace pisd::cli
