// Command-line front end: experiment orchestration and result emission.
//
// Configuration precedence: built-in defaults < --preset < config file
// (--config, key = value text or a JSON sidecar from a previous run) <
// WLMC_* environment variables < explicit flags.  The effective
// configuration is echoed into the JSON sidecar next to the CSV output, and
// that sidecar can be passed back via --config to reproduce the run.

#include <CLI11.hpp>

#include "wlmc/accelerated.hpp"
#include "wlmc/analytic.hpp"
#include "wlmc/engine.hpp"
#include "wlmc/media.hpp"
#include "wlmc/quadrature.hpp"
#include "wlmc/run_io.hpp"
#include "wlmc/sojourn.hpp"
#include "wlmc/thermal.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace {

using wlmc::io::KeyValues;

const std::set<std::string> kKnownKeys = {
    "subcommand", "chi_list",  "n_list",    "n_steps", "n_paths",   "seed",
    "estimator",  "geometry",  "distance",  "d0",      "beta",      "n_max",
    "workers",    "reduction", "output",    "format",  "dispersion", "omega0",
    "tables_file"};

KeyValues defaults() {
  return {{"subcommand", ""},  {"chi_list", "1"},      {"n_list", "32,64,128,256,512,1024,2048,4096"},
          {"n_steps", "1000"}, {"n_paths", "100000"},  {"seed", "0"},
          {"estimator", "trapezoid"}, {"geometry", "halfspace"}, {"distance", "1"},
          {"d0", "0"},         {"beta", "20"},         {"n_max", "-1"},
          {"workers", "0"},    {"reduction", "ordered"}, {"output", ""},
          {"format", "csv"},   {"dispersion", "constant"}, {"omega0", "1"},
          {"tables_file", ""}};
}

KeyValues preset_values(const std::string& name) {
  const std::string finite_chis = "0.1,0.32,1,3.2,10,32,100,1000,10000,1000000";
  if (name == "fig2")
    return {{"subcommand", "cp-vacuum"}, {"chi_list", finite_chis + ",inf"},
            {"n_steps", "1000"},         {"n_paths", "1000000"}};
  if (name == "fig3")
    return {{"subcommand", "cp-embedded"}, {"chi_list", finite_chis},
            {"n_steps", "1000"},           {"n_paths", "200000"}};
  if (name == "fig4")
    return {{"subcommand", "casimir"}, {"chi_list", finite_chis + ",inf"},
            {"n_steps", "1000"},       {"n_paths", "1000000"}};
  if (name == "fig5")
    return {{"subcommand", "convergence"}, {"geometry", "halfspace"},
            {"chi_list", "inf,1,100,10000"}, {"n_paths", "1000000"}};
  if (name == "fig6")
    return {{"subcommand", "convergence"}, {"geometry", "gap"},
            {"chi_list", "inf,1,100,10000"}, {"n_paths", "1000000"}};
  throw std::runtime_error("unknown preset '" + name + "' (expected fig2..fig6)");
}

std::string upper_env_key(const std::string& key) {
  std::string out = "WLMC_";
  for (char c : key) out += (c == '-') ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

void merge(KeyValues& base, const KeyValues& over) {
  for (const auto& [k, v] : over) base[k] = v;
}

void validate_keys(const KeyValues& kv) {
  for (const auto& [k, _] : kv)
    if (!kKnownKeys.count(k)) throw std::runtime_error("unknown config key '" + k + "'");
}

double parse_chi(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return wlmc::media::kDirichlet;
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad chi value '" + s + "'");
  if (v < 0) throw std::runtime_error("chi must be >= 0");
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_num(const KeyValues& kv, const std::string& key) {
  const std::string& s = kv.at(key);
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad numeric value for " + key + ": '" + s + "'");
  return v;
}

std::size_t parse_count(const KeyValues& kv, const std::string& key) {
  const double v = parse_num(kv, key);
  if (!(v >= 0) || v > 1e15) throw std::runtime_error(key + " out of range");
  return static_cast<std::size_t>(v + 0.5);
}

struct Resolved {
  KeyValues kv;
  std::vector<double> chi_list;
  std::vector<std::size_t> n_list;
  wlmc::engine::RunConfig cfg;  // geometry filled by the subcommand
  std::string format;
  std::string output;
};

Resolved resolve(const KeyValues& kv) {
  validate_keys(kv);
  Resolved r;
  r.kv = kv;
  for (const auto& s : split_commas(kv.at("chi_list"))) r.chi_list.push_back(parse_chi(s));
  if (r.chi_list.empty()) throw std::runtime_error("empty chi list");
  for (const auto& s : split_commas(kv.at("n_list"))) {
    const std::size_t n = static_cast<std::size_t>(std::stod(s) + 0.5);
    r.n_list.push_back(n);
  }
  r.cfg.n_steps = parse_count(kv, "n_steps");
  r.cfg.n_paths = parse_count(kv, "n_paths");
  r.cfg.seed = static_cast<std::uint64_t>(parse_num(kv, "seed"));
  r.cfg.d0 = parse_num(kv, "d0");
  r.cfg.workers = static_cast<int>(parse_num(kv, "workers"));
  const std::string est = kv.at("estimator");
  if (est == "trapezoid") r.cfg.estimator = wlmc::engine::Estimator::trapezoid;
  else if (est == "interpolation") r.cfg.estimator = wlmc::engine::Estimator::interpolation;
  else if (est == "dirichlet") r.cfg.estimator = wlmc::engine::Estimator::dirichlet;
  else if (est == "mgf_segment") r.cfg.estimator = wlmc::engine::Estimator::mgf_segment;
  else if (est == "sojourn_sample") r.cfg.estimator = wlmc::engine::Estimator::sojourn_sample;
  else throw std::runtime_error("unknown estimator '" + est + "'");
  const std::string red = kv.at("reduction");
  if (red == "ordered") r.cfg.reduction = wlmc::engine::Reduction::ordered;
  else if (red == "free") r.cfg.reduction = wlmc::engine::Reduction::free;
  else throw std::runtime_error("unknown reduction '" + red + "'");
  r.format = kv.at("format");
  if (r.format != "csv" && r.format != "json")
    throw std::runtime_error("format must be csv or json");
  r.output = kv.at("output");
  return r;
}

std::string chi_string(double chi) {
  return wlmc::media::is_dirichlet(chi) ? "inf" : wlmc::io::format_double(chi);
}

void emit(const Resolved& r, const wlmc::io::CsvTable& table,
          const std::map<std::string, double>& oracles, double wall,
          const std::map<std::string, std::string>& extras = {}) {
  const std::string body =
      r.format == "csv" ? wlmc::io::to_csv(table) : wlmc::io::to_json_rows(table);
  if (r.output.empty()) {
    std::cout << body;
    return;
  }
  wlmc::io::write_file(r.output, body);
  const std::string stem = r.output.substr(0, r.output.find_last_of('.'));
  const auto seed = static_cast<std::uint64_t>(parse_num(r.kv, "seed"));
  wlmc::io::write_file(stem + ".json",
                       wlmc::io::make_sidecar(r.kv, seed, wall, oracles, extras));
}

wlmc::io::CsvTable result_table(const Resolved& r, const std::string& geometry,
                                const std::vector<double>& chis,
                                const std::vector<wlmc::engine::RunResult>& results) {
  wlmc::io::CsvTable t;
  t.header = {"geometry", "chi", "N", "n_paths", "estimate", "std_error", "normalized", "seed"};
  for (std::size_t i = 0; i < results.size(); ++i) {
    t.rows.push_back({geometry, chi_string(chis[i]), std::to_string(r.cfg.n_steps),
                      std::to_string(results[i].n_paths_used),
                      wlmc::io::format_double(results[i].estimate),
                      wlmc::io::format_double(results[i].std_error),
                      wlmc::io::format_double(results[i].normalized), r.kv.at("seed")});
  }
  return t;
}

int run_cp(const Resolved& r, bool embedded) {
  const double dist = parse_num(r.kv, "distance");
  if (!(dist > 0)) throw std::runtime_error("distance must be positive");
  using namespace wlmc;
  std::vector<engine::RunResult> results;
  double wall = 0.0;
  Resolved rr = r;
  const double atom = 0.0;
  const auto mode = embedded ? engine::CpMode::embedded : engine::CpMode::vacuum;
  if (r.cfg.estimator == engine::Estimator::mgf_segment ||
      r.cfg.estimator == engine::Estimator::sojourn_sample) {
    if (embedded) throw std::runtime_error("accelerated estimators support vacuum-side atoms only");
    std::optional<sojourn::SojournTables> tables;
    if (r.cfg.estimator == engine::Estimator::sojourn_sample) {
      const std::string file = r.kv.at("tables_file");
      tables = file.empty() ? sojourn::SojournTables::build() : sojourn::SojournTables::load(file);
    }
    for (double chi : r.chi_list) {
      rr.cfg.geometry =
          media::DielectricProfile::half_space(embedded ? -dist : dist, chi,
                                               embedded ? media::Side::below : media::Side::above);
      engine::RunResult res;
      if (r.cfg.estimator == engine::Estimator::mgf_segment)
        res = accelerated::estimate_cp_mgf_segments(rr.cfg, atom);
      else
        res = accelerated::estimate_cp_sojourn_sampled(rr.cfg, atom, *tables);
      results.push_back(res);
      wall += res.wall_seconds;
    }
  } else {
    // vacuum atom at the origin, interface at +distance (embedded: dielectric
    // below, atom inside it, vacuum above at +distance)
    rr.cfg.geometry = embedded
                          ? media::DielectricProfile::half_space(dist, r.chi_list[0],
                                                                 media::Side::below)
                          : media::DielectricProfile::half_space(dist, r.chi_list[0],
                                                                 media::Side::above);
    results = engine::estimate_cp_sweep(rr.cfg, mode, atom, r.chi_list);
    wall = results.empty() ? 0.0 : results[0].wall_seconds;
  }
  std::map<std::string, double> oracles;
  for (double chi : r.chi_list) {
    if (media::is_dirichlet(chi)) {
      if (!embedded) oracles["eta_te(inf)"] = 1.0 / 6.0;
    } else if (embedded) {
      oracles["eta_te_prime(" + chi_string(chi) + ")"] = analytic::eta_te_prime(chi).value;
    } else {
      oracles["eta_te(" + chi_string(chi) + ")"] = analytic::eta_te(chi).value;
    }
  }
  const std::string geom = embedded ? "cp-embedded" : "cp-vacuum";
  emit(r, result_table(r, geom, r.chi_list, results), oracles, wall);
  return 0;
}

int run_casimir(const Resolved& r) {
  const double dist = parse_num(r.kv, "distance");
  if (!(dist > 0)) throw std::runtime_error("distance must be positive");
  using namespace wlmc;
  Resolved rr = r;
  rr.cfg.geometry =
      media::DielectricProfile::gap(-0.5 * dist, 0.5 * dist, r.chi_list[0], r.chi_list[0]);
  if (r.cfg.estimator == engine::Estimator::mgf_segment ||
      r.cfg.estimator == engine::Estimator::sojourn_sample)
    throw std::runtime_error("accelerated estimators apply to cp runs only");
  auto results = engine::estimate_casimir_sweep(rr.cfg, r.chi_list);
  std::map<std::string, double> oracles;
  for (double chi : r.chi_list) {
    oracles["gamma_te(" + chi_string(chi) + ")"] =
        media::is_dirichlet(chi) ? 0.5 : analytic::gamma_te(chi, chi).value;
  }
  emit(r, result_table(r, "casimir", r.chi_list, results),
       oracles, results.empty() ? 0.0 : results[0].wall_seconds);
  return 0;
}

int run_convergence(const Resolved& r) {
  using namespace wlmc;
  Resolved rr = r;
  const double dist = parse_num(r.kv, "distance");
  const bool gap = r.kv.at("geometry") == "gap";
  rr.cfg.geometry = gap ? media::DielectricProfile::gap(-0.5 * dist, 0.5 * dist, 1.0, 1.0)
                        : media::DielectricProfile::half_space(dist, 1.0, media::Side::above);
  std::vector<engine::SweepColumn> columns;
  for (double chi : r.chi_list) {
    engine::SweepColumn col;
    col.chi = chi;
    col.estimator =
        media::is_dirichlet(chi) ? engine::Estimator::dirichlet : r.cfg.estimator;
    columns.push_back(col);
  }
  const auto sweep = engine::convergence_sweep(rr.cfg, r.n_list, columns);
  wlmc::io::CsvTable t;
  t.header = {"chi",       "estimator", "N",
              "normalized", "std_error", "rel_error",
              "rel_error_se", "diff_to_finest", "diff_se"};
  for (const auto& p : sweep.points) {
    t.rows.push_back({chi_string(p.column.chi), engine::to_string(p.column.estimator),
                      std::to_string(p.n_steps), wlmc::io::format_double(p.normalized),
                      wlmc::io::format_double(p.normalized_std_error),
                      wlmc::io::format_double(p.rel_error),
                      wlmc::io::format_double(p.rel_error_se),
                      wlmc::io::format_double(p.diff_to_finest),
                      wlmc::io::format_double(p.diff_to_finest_se)});
  }
  std::map<std::string, double> oracles;
  std::map<std::string, std::string> extras;
  const std::size_t n_lo = *std::min_element(r.n_list.begin(), r.n_list.end());
  const std::size_t n_hi = *std::max_element(r.n_list.begin(), r.n_list.end());
  for (const auto& col : columns) {
    const double slope = engine::fitted_slope(sweep, col, n_lo, n_hi);
    extras["slope chi=" + chi_string(col.chi) + " " + engine::to_string(col.estimator)] =
        wlmc::io::format_double(slope);
    const double slope_diff = engine::fitted_slope_diff(sweep, col, n_lo, n_hi);
    extras["slope_diff chi=" + chi_string(col.chi) + " " + engine::to_string(col.estimator)] =
        wlmc::io::format_double(slope_diff);
    for (const auto& p : sweep.points) {
      if (p.column.chi == col.chi && p.column.estimator == col.estimator) {
        oracles["oracle chi=" + chi_string(col.chi)] = p.oracle;
        break;
      }
    }
  }
  emit(r, t, oracles, 0.0, extras);
  return 0;
}

int run_analytic(const Resolved& r) {
  using namespace wlmc;
  wlmc::io::CsvTable t;
  t.header = {"chi", "eta_te", "eta_te_prime", "gamma_te"};
  for (double chi : r.chi_list) {
    const double eta = analytic::eta_te(chi).value;
    const double etap = media::is_dirichlet(chi) ? 0.0 : analytic::eta_te_prime(chi).value;
    const double gam = media::is_dirichlet(chi)
                           ? 0.5
                           : (chi == 0.0 ? 0.0 : analytic::gamma_te(chi, chi).value);
    t.rows.push_back({chi_string(chi), wlmc::io::format_double(eta),
                      wlmc::io::format_double(etap), wlmc::io::format_double(gam)});
  }
  emit(r, t, {}, 0.0);
  return 0;
}

int run_tables(const Resolved& r) {
  using namespace wlmc;
  const std::string path = r.output.empty() ? "sojourn_tables.bin" : r.output;
  auto tables = sojourn::SojournTables::build();
  tables.save(path);
  const auto reloaded = sojourn::SojournTables::load(path);
  // spot-check the persisted tables against direct inversion
  rng::Stream probe(rng::StreamSpec{0x7AB1E5ull, 1});
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    sojourn::SojournParams p;
    p.a = 0.0;
    p.c = probe.uniform() * 4.0 - 2.0;
    p.t = 1.0;
    p.d = probe.uniform() * 6.0 - 3.0;
    const double u = probe.uniform();
    worst = std::max(worst,
                     std::abs(reloaded.sample(p, u) - sojourn::sample_sojourn_direct(p, u)));
  }
  std::cout << "sojourn tables written to " << path << "\n"
            << "grid: nu [" << tables.grid().nu_min << ", " << tables.grid().nu_max << "] x"
            << tables.grid().nu_count << ", delta [" << tables.grid().delta_min << ", "
            << tables.grid().delta_max << "] x" << tables.grid().delta_count << ", "
            << tables.grid().n_quantiles << " quantiles\n"
            << "build-time interpolation error bound: " << tables.interp_error_bound() << "\n"
            << "reload validation: max |table - direct| = " << worst << " over 200 probes\n";
  if (worst > 5e-3) throw std::runtime_error("tables validation failed");
  return 0;
}

int run_thermal(const Resolved& r) {
  using namespace wlmc;
  const double dist = parse_num(r.kv, "distance");
  const double beta = parse_num(r.kv, "beta");
  const int n_max = static_cast<int>(parse_num(r.kv, "n_max"));
  thermal::DispersionModel disp;
  if (r.kv.at("dispersion") == "lorentz")
    disp = thermal::DispersionModel::lorentz(parse_num(r.kv, "omega0"));
  else if (r.kv.at("dispersion") != "constant")
    throw std::runtime_error("dispersion must be constant or lorentz");
  thermal::ThermalConfig tc;
  tc.beta = beta;
  tc.n_max = n_max;
  Resolved rr = r;
  wlmc::io::CsvTable t;
  t.header = {"geometry", "chi", "N", "n_paths", "estimate", "std_error", "normalized", "seed"};
  std::map<std::string, std::string> extras;
  double wall = 0.0;
  const double chi = r.chi_list[0];
  if (r.kv.at("geometry") == "gap") {
    rr.cfg.geometry = media::DielectricProfile::gap(-0.5 * dist, 0.5 * dist, chi, chi);
    const auto res = thermal::free_energy_thermal(rr.cfg, disp, tc);
    t.rows.push_back({"thermal-gap", chi_string(chi), std::to_string(r.cfg.n_steps),
                      std::to_string(res.n_paths_used), wlmc::io::format_double(res.value),
                      wlmc::io::format_double(res.std_error),
                      wlmc::io::format_double(res.normalized), r.kv.at("seed")});
    extras["n_modes"] = std::to_string(res.n_modes);
    extras["tail_bound"] = wlmc::io::format_double(res.tail_bound);
    extras["truncation_warning"] = res.truncation_warning ? "true" : "false";
    wall = res.wall_seconds;
  } else {
    rr.cfg.geometry = media::DielectricProfile::half_space(dist, chi, media::Side::above);
    const auto res = thermal::cp_thermal(rr.cfg, 0.0, disp, tc);
    t.rows.push_back({"thermal-halfspace", chi_string(chi), std::to_string(r.cfg.n_steps),
                      std::to_string(res.n_paths_used), wlmc::io::format_double(res.value),
                      wlmc::io::format_double(res.std_error),
                      wlmc::io::format_double(res.normalized), r.kv.at("seed")});
    extras["n_modes"] = std::to_string(res.n_modes);
    extras["tail_bound"] = wlmc::io::format_double(res.tail_bound);
    extras["truncation_warning"] = res.truncation_warning ? "true" : "false";
    wall = res.wall_seconds;
  }
  emit(r, t, {}, wall, extras);
  return 0;
}

int dispatch(const std::string& sub, const KeyValues& kv) {
  Resolved r = resolve(kv);
  if (sub == "cp-vacuum") return run_cp(r, false);
  if (sub == "cp-embedded") return run_cp(r, true);
  if (sub == "casimir") return run_casimir(r);
  if (sub == "convergence") return run_convergence(r);
  if (sub == "analytic") return run_analytic(r);
  if (sub == "tables") return run_tables(r);
  if (sub == "thermal") return run_thermal(r);
  throw std::runtime_error("unknown subcommand '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"worldline Monte Carlo for TE Casimir and Casimir-Polder energies"};
  app.require_subcommand(1);

  const std::vector<std::string> subnames = {"cp-vacuum", "cp-embedded", "casimir", "convergence",
                                             "analytic",  "tables",      "thermal",  "run"};
  std::map<std::string, KeyValues> cli_values;  // per subcommand
  std::map<std::string, std::string> config_paths, presets;

  for (const auto& name : subnames) {
    auto* sub = app.add_subcommand(name, "");
    auto bind = [&cli_values, name](const std::string& key) {
      return [&cli_values, name, key](const std::string& v) { cli_values[name][key] = v; };
    };
    sub->add_option_function<std::string>("--chi", bind("chi_list"), "susceptibility (or 'inf')");
    sub->add_option_function<std::string>("--chi-list", bind("chi_list"),
                                          "comma-separated susceptibilities");
    sub->add_option_function<std::string>("--n-steps", bind("n_steps"), "points per path");
    sub->add_option_function<std::string>("--n-paths", bind("n_paths"), "paths per estimate");
    sub->add_option_function<std::string>("--n-list", bind("n_list"),
                                          "comma-separated N values (convergence)");
    sub->add_option_function<std::string>("--seed", bind("seed"), "master RNG seed");
    sub->add_option_function<std::string>("--estimator", bind("estimator"),
                                          "trapezoid|interpolation|dirichlet|mgf_segment|sojourn_sample");
    sub->add_option_function<std::string>("--geometry", bind("geometry"), "halfspace|gap");
    sub->add_option_function<std::string>("--distance", bind("distance"),
                                          "atom-interface distance / gap width");
    sub->add_option_function<std::string>("--d0", bind("d0"), "x0 sampling scale (0 = gap width)");
    sub->add_option_function<std::string>("--beta", bind("beta"), "inverse temperature");
    sub->add_option_function<std::string>("--n-max", bind("n_max"),
                                          "Matsubara truncation (-1 = auto)");
    sub->add_option_function<std::string>("--workers", bind("workers"), "worker count (0 = all)");
    sub->add_option_function<std::string>("--reduction", bind("reduction"), "ordered|free");
    sub->add_option_function<std::string>("--output", bind("output"), "CSV output path");
    sub->add_option_function<std::string>("--format", bind("format"), "csv|json");
    sub->add_option_function<std::string>("--dispersion", bind("dispersion"), "constant|lorentz");
    sub->add_option_function<std::string>("--omega0", bind("omega0"), "Lorentz resonance");
    sub->add_option_function<std::string>("--tables-file", bind("tables_file"),
                                          "persisted sojourn tables");
    sub->add_option("--config", config_paths[name], "key=value file or JSON sidecar");
    sub->add_option("--preset", presets[name], "fig2|fig3|fig4|fig5|fig6");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    KeyValues kv = defaults();
    std::string sub = name;
    if (!presets[name].empty()) {
      auto pv = preset_values(presets[name]);
      if (pv.count("subcommand")) {
        if (name != "run" && pv["subcommand"] != name)
          throw std::runtime_error("preset " + presets[name] + " belongs to subcommand " +
                                   pv["subcommand"]);
        if (name == "run") sub = pv["subcommand"];
      }
      merge(kv, pv);
    }
    if (!config_paths[name].empty()) {
      auto file_kv = wlmc::io::parse_config_file(config_paths[name]);
      validate_keys(file_kv);
      if (file_kv.count("subcommand") && !file_kv["subcommand"].empty()) {
        if (name == "run") sub = file_kv["subcommand"];
        else if (file_kv["subcommand"] != name)
          throw std::runtime_error("config subcommand mismatch: file says '" +
                                   file_kv["subcommand"] + "'");
      }
      merge(kv, file_kv);
    }
    for (const auto& key : kKnownKeys) {
      if (const char* env = std::getenv(upper_env_key(key).c_str())) kv[key] = env;
    }
    merge(kv, cli_values[name]);
    if (sub == "run") throw std::runtime_error("'run' needs a --config with a subcommand");
    kv["subcommand"] = sub;
    return dispatch(sub, kv);
  } catch (const wlmc::quadrature::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << " (estimate " << e.estimate
              << ", achieved error " << e.achieved_error << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
