#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/compare.hpp"
#include "stoclab/config.hpp"
#include "stoclab/csv.hpp"
#include "stoclab/dyson.hpp"
#include "stoclab/fock.hpp"
#include "stoclab/fpe.hpp"
#include "stoclab/master.hpp"
#include "stoclab/rate_loop.hpp"
#include "stoclab/sde.hpp"
#include "stoclab/ssa.hpp"
#include "stoclab/time_grid.hpp"

namespace stoclab {

struct RunResult {
  std::vector<std::string> outputs;
};

namespace detail {

inline TimeGrid grid_from_json(const json& j) {
  try {
    return make_time_grid(j.at("t0").get<double>(), j.at("tf").get<double>(),
                          j.at("steps").get<std::size_t>());
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, std::string("bad grid: ") + e.what());
  }
}

inline std::uint64_t seed_from(const json& config, std::optional<std::uint64_t> override_seed) {
  if (override_seed) return *override_seed;
  return config.value("seed", std::uint64_t{0});
}

inline std::string out_path(const std::string& out_dir, const std::string& name) {
  return (std::filesystem::path(out_dir) / name).string();
}

inline RunResult run_sde(const json& config, std::uint64_t seed, const std::string& out_dir) {
  const LangevinSpec spec = validate_langevin_spec(langevin_from_json(config.at("model")));
  const TimeGrid grid = grid_from_json(config.at("grid"));
  const double phi0 = config.at("phi0").get<double>();
  const std::size_t n_traj = config.at("n_traj").get<std::size_t>();
  const SdeScheme scheme = spec.interpretation == Interpretation::Ito
                               ? SdeScheme::EulerMaruyama
                               : SdeScheme::StratonovichHeun;
  SdeOptions opts;
  opts.n_threads = config.value("threads", 1u);
  const EnsembleMoments m = simulate_ensemble(spec, scheme, grid, phi0, n_traj, seed, opts);
  CsvTable table;
  table.columns = {"t", "mean", "stderr", "var", "stderr_var"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.rows.push_back({grid.points[i], m.m1.mean_estimates[i], m.m1.std_errors[i],
                          m.variance[i], m.variance_stderr[i]});
  const std::string path = out_path(out_dir, "sde.csv");
  write_csv(path, table);
  return {{path}};
}

inline PdfGrid initial_pdf_from_json(const json& j, const PdfGeometry& geom) {
  if (j.contains("delta")) return PdfGrid::delta(geom, j.at("delta").get<double>());
  if (j.contains("gaussian")) {
    const double mean = j.at("gaussian").at("mean").get<double>();
    const double sd = j.at("gaussian").at("sd").get<double>();
    require(sd > 0.0, errc::config_parse_error, "gaussian initial needs sd > 0");
    return PdfGrid::from_function(geom, [mean, sd](double x) {
      const double z = (x - mean) / sd;
      return std::exp(-0.5 * z * z);
    });
  }
  fail(errc::config_parse_error, "initial must specify 'delta' or 'gaussian'");
}

inline RunResult run_fpe(const json& config, std::uint64_t, const std::string& out_dir) {
  const LangevinSpec spec = validate_langevin_spec(langevin_from_json(config.at("model")));
  PdfGeometry geom;
  try {
    geom.phi_min = config.at("geometry").at("phi_min").get<double>();
    geom.phi_max = config.at("geometry").at("phi_max").get<double>();
    geom.n_cells = config.at("geometry").at("n_cells").get<int>();
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, std::string("bad geometry: ") + e.what());
  }
  const TimeGrid grid = grid_from_json(config.at("grid"));
  const FpeGenerator gen = build_fpe_generator(spec, geom);
  PdfGrid p = initial_pdf_from_json(config.at("initial"), geom);

  CsvTable moments;
  moments.columns = {"t", "mean", "stderr", "var", "stderr_var"};
  double t_prev = grid.t0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    p = evolve_pdf(gen, std::move(p), grid.points[i] - t_prev);
    t_prev = grid.points[i];
    moments.rows.push_back({grid.points[i], p.mean(), 0.0, p.variance(), 0.0});
  }
  RunResult result;
  const std::string mpath = out_path(out_dir, "fpe_moments.csv");
  write_csv(mpath, moments);
  result.outputs.push_back(mpath);

  CsvTable density;
  density.columns = {"phi_center", "density"};
  for (int i = 0; i < geom.n_cells; ++i)
    density.rows.push_back({geom.center(i), p.values[static_cast<std::size_t>(i)]});
  const std::string dpath = out_path(out_dir, "fpe_density.csv");
  write_csv(dpath, density);
  result.outputs.push_back(dpath);

  if (config.value("dump_generator", false)) {
    CsvTable dump;
    dump.columns = {"row", "col", "value"};
    for (const auto& [r, c, v] : gen.triplets())
      dump.rows.push_back({static_cast<double>(r), static_cast<double>(c), v});
    const std::string gpath = out_path(out_dir, "fpe_generator.csv");
    write_csv(gpath, dump);
    result.outputs.push_back(gpath);
  }
  return result;
}

inline RunResult run_doi(const json& config, std::uint64_t, const std::string& out_dir) {
  const MasterSpec spec = validate_master_spec(master_from_json(config.at("model")));
  const int n_trunc = config.at("N").get<int>();
  const TimeGrid grid = grid_from_json(config.at("grid"));
  const Liouvillian l = build_liouvillian_doi(spec, n_trunc);
  Eigen::VectorXd state = config.contains("poisson_mu")
                              ? poisson_state(config.at("poisson_mu").get<double>(), n_trunc)
                              : basis_state(n_trunc, config.at("n0").get<int>());
  CsvTable table;
  table.columns = {"t", "mean_n", "var_n", "leak"};
  double t_prev = grid.t0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    state = evolve_state(l, state, grid.points[i] - t_prev);
    t_prev = grid.points[i];
    const double m1 = projection_expectation(state, 1);
    const double m2 = projection_expectation(state, 2);
    table.rows.push_back({grid.points[i], m1, m2 - m1 * m1, 1.0 - state_mass(state)});
  }
  RunResult result;
  const std::string path = out_path(out_dir, "doi.csv");
  write_csv(path, table);
  result.outputs.push_back(path);
  if (config.value("dump_liouvillian", false)) {
    CsvTable dump;
    dump.columns = {"row", "col", "value"};
    for (const auto& [r, c, v] : matrix_triplets(l.matrix))
      dump.rows.push_back({static_cast<double>(r), static_cast<double>(c), v});
    const std::string lpath = out_path(out_dir, "doi_liouvillian.csv");
    write_csv(lpath, dump);
    result.outputs.push_back(lpath);
  }
  return result;
}

inline RunResult run_ssa(const json& config, std::uint64_t seed, const std::string& out_dir) {
  const MasterSpec spec = validate_master_spec(master_from_json(config.at("model")));
  const TimeGrid grid = grid_from_json(config.at("grid"));
  const long n0 = config.at("n0").get<long>();
  const std::size_t n_traj = config.at("n_traj").get<std::size_t>();
  SsaOptions opts;
  opts.n_threads = config.value("threads", 1u);
  const EnsembleMoments m = simulate_ssa_ensemble(spec, grid, n0, n_traj, seed, opts);
  CsvTable table;
  table.columns = {"t", "mean", "stderr", "var"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.rows.push_back(
        {grid.points[i], m.m1.mean_estimates[i], m.m1.std_errors[i], m.variance[i]});
  RunResult result;
  const std::string path = out_path(out_dir, "ssa.csv");
  write_csv(path, table);
  result.outputs.push_back(path);
  if (config.contains("histogram")) {
    const double t = config.at("histogram").at("t").get<double>();
    const long max_n = config.at("histogram").at("max_n").get<long>();
    const auto hist = simulate_ssa_histogram(spec, t, n0, max_n, n_traj, seed, opts);
    CsvTable htab;
    htab.columns = {"n", "count"};
    for (std::size_t n = 0; n < hist.size(); ++n)
      htab.rows.push_back({static_cast<double>(n), static_cast<double>(hist[n])});
    const std::string hpath = out_path(out_dir, "ssa_histogram.csv");
    write_csv(hpath, htab);
    result.outputs.push_back(hpath);
  }
  return result;
}

inline RunResult run_perturb(const json& config, std::uint64_t, const std::string& out_dir) {
  const MasterSpec spec = validate_master_spec(master_from_json(config.at("model")));
  const int n_trunc = config.at("N").get<int>();
  const int n0 = config.at("n0").get<int>();
  const int max_order = config.at("max_order").get<int>();
  const double t = config.at("t").get<double>();
  DysonRep rep = DysonRep::shifted;
  if (config.value("rep", std::string("shifted")) == "unshifted") rep = DysonRep::unshifted;
  DysonOptions opts;
  opts.resolution = config.value("resolution", 64);
  const DysonMomentSeries series = dyson_moment_series(spec, n_trunc, n0, max_order, t, rep, opts);
  CsvTable table;
  table.columns = {"t", "order", "moment_estimate", "exact_reference", "abs_error"};
  for (std::size_t k = 0; k < series.per_order_mean.size(); ++k)
    table.rows.push_back({t, static_cast<double>(k), series.per_order_mean[k],
                          series.exact_reference,
                          std::abs(series.per_order_mean[k] - series.exact_reference)});
  const std::string path = out_path(out_dir, "perturb.csv");
  write_csv(path, table);
  return {{path}};
}

inline RunResult run_rateloop(const json& config, std::uint64_t, const std::string& out_dir) {
  RateModel model;
  try {
    const json& m = config.at("model");
    model.lambda = m.at("lambda").get<double>();
    model.diffusion = m.at("diffusion").get<double>();
    model.dim = m.at("dim").get<int>();
    model.a0 = m.at("a0").get<double>();
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, std::string("bad rate model: ") + e.what());
  }
  const TimeGrid grid = grid_from_json(config.at("grid"));
  const auto mean_field = mean_field_solve(validate_rate_model(model), grid);
  const auto corrected = one_loop_solve(model, grid);
  CsvTable table;
  table.columns = {"t", "a_mean_field", "a_one_loop", "correction"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.rows.push_back(
        {grid.points[i], mean_field[i], corrected[i], corrected[i] - mean_field[i]});
  const std::string path = out_path(out_dir, "rateloop.csv");
  write_csv(path, table);
  return {{path}};
}

inline void write_manifest(const std::string& out_dir, const std::string& subcommand,
                           const json& config, std::uint64_t seed, const RunResult& result) {
  json manifest{{"tool", "stoclab"},
                {"version", kVersion},
                {"subcommand", subcommand},
                {"seed", seed},
                {"config_hash", config_hash(config)},
                {"config", config},
                {"outputs", result.outputs}};
  std::ofstream out(out_path(out_dir, "manifest.json"));
  require(out.good(), errc::config_parse_error, "cannot write manifest");
  out << manifest.dump(2) << '\n';
}

}  // namespace detail

/// Dispatches one experiment and writes its CSV outputs plus a manifest that
/// pins seed, config hash and tool version for exact reproduction.
inline RunResult run_experiment(const std::string& subcommand, const json& config,
                                std::optional<std::uint64_t> seed_override,
                                const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::uint64_t seed = detail::seed_from(config, seed_override);
  RunResult result;
  if (subcommand == "sde")
    result = detail::run_sde(config, seed, out_dir);
  else if (subcommand == "fpe")
    result = detail::run_fpe(config, seed, out_dir);
  else if (subcommand == "doi")
    result = detail::run_doi(config, seed, out_dir);
  else if (subcommand == "ssa")
    result = detail::run_ssa(config, seed, out_dir);
  else if (subcommand == "perturb")
    result = detail::run_perturb(config, seed, out_dir);
  else if (subcommand == "rateloop")
    result = detail::run_rateloop(config, seed, out_dir);
  else
    fail(errc::unknown_subcommand, "unknown experiment '" + subcommand + "'");
  detail::write_manifest(out_dir, subcommand, config, seed, result);
  return result;
}

inline RunResult run_experiment_file(const std::string& subcommand, const std::string& config_path,
                                     std::optional<std::uint64_t> seed_override,
                                     const std::string& out_dir) {
  return run_experiment(subcommand, load_json_file(config_path), seed_override, out_dir);
}

}  // namespace stoclab
