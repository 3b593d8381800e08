// gradchain: parameter sweeps, verification runs and CSV/JSON export for the
// exponentially graded harmonic chain and its continuum limit.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "gradchain/gradchain.hpp"

using json = nlohmann::ordered_json;
using namespace gradchain;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInvalid = 2;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --config accepts a JSON object; keys under "params" (or at top level) feed
// options the command line left unset, mirroring the "params" block of the
// JSON output. Explicit flags win.
void apply_json_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + std::string(e.what()));
  }
  const json& params = j.contains("params") ? j.at("params") : j;
  for (auto it = params.begin(); it != params.end(); ++it) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + it.key());
    if (opt == nullptr) throw std::invalid_argument("config: unknown option '" + it.key() + "'");
    if (opt->count() > 0) continue;
    auto as_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (it.value().is_array())
      for (const auto& v : it.value()) opt->add_result(as_text(v));
    else
      opt->add_result(as_text(it.value()));
    opt->run_callback();
  }
}

std::string resolve_output(const std::string& path) {
  if (path == "-") return path;
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("GRADCHAIN_OUTDIR")) p = std::filesystem::path(dir) / p;
  }
  return p.string();
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  const std::string resolved = resolve_output(path);
  std::ofstream out(resolved, std::ios::binary);
  if (!out) throw std::invalid_argument("output: cannot open '" + resolved + "' for writing");
  out << content;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return fmt17(v.get<double>());
  return v.dump();
}

struct Report {
  std::string command;
  json params = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json summary = json::object();
};

std::string render_csv(const Report& report) {
  std::string out;
  out += "# command: " + report.command + "\n";
  for (auto it = report.params.begin(); it != report.params.end(); ++it)
    out += "# " + it.key() + ": " + csv_cell(it.value()) + "\n";
  for (std::size_t c = 0; c < report.columns.size(); ++c)
    out += report.columns[c] + (c + 1 < report.columns.size() ? "," : "\n");
  for (const auto& row : report.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      out += csv_cell(row[c]) + (c + 1 < row.size() ? "," : "\n");
  for (auto it = report.summary.begin(); it != report.summary.end(); ++it)
    out += "# " + it.key() + ": " + csv_cell(it.value()) + "\n";
  return out;
}

json render_json(const Report& report) {
  json j;
  j["command"] = report.command;
  j["params"] = report.params;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[report.columns[c]] = row[c];
    rows.push_back(obj);
  }
  j["results"] = rows;
  if (!report.summary.empty()) j["summary"] = report.summary;
  return j;
}

void emit(const Report& report, const std::string& format, const std::string& path) {
  if (format == "csv")
    write_text(path, render_csv(report));
  else
    write_text(path, render_json(report).dump(2) + "\n");
}

std::string derived_path(const std::string& path, const std::string& tag) {
  if (path == "-") return path;
  std::filesystem::path p(path);
  std::filesystem::path alt =
      p.parent_path() / (p.stem().string() + "." + tag + p.extension().string());
  return alt.string();
}

struct ChainOptions {
  Eigen::Index n{64};
  double xi{1.0};
  double omega0{1.0};
  double m0{1.0};

  ChainSpec<> spec() const { return {n, xi, omega0, m0}; }
  void register_on(CLI::App* cmd) {
    cmd->add_option("--n", n, "particle count (N >= 2)");
    cmd->add_option("--xi", xi, "grading parameter (> 0; 1 = homogeneous)");
    cmd->add_option("--omega0", omega0, "base angular frequency [rad/s]");
    cmd->add_option("--m0", m0, "base mass [kg]");
  }
  json params() const { return {{"n", n}, {"xi", xi}, {"omega0", omega0}, {"m0", m0}}; }
};

struct OutputOptions {
  std::string format{"csv"};
  std::string path{"-"};
  std::string config_path;
  void register_on(CLI::App* cmd) {
    cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--output,-o", path, "output file, '-' for stdout");
    cmd->add_option("--config", config_path, "JSON file providing defaults for unset options");
  }
};

Eigen::VectorXd frequency_grid(double lo, double hi, Eigen::Index count,
                               const std::string& spacing) {
  if (count < 1) throw std::invalid_argument("omega-count: must be >= 1");
  if (count == 1) return Eigen::VectorXd::Constant(1, lo);
  if (spacing == "log") {
    if (!(lo > 0)) throw std::invalid_argument("omega-min: log spacing needs omega-min > 0");
    return Eigen::VectorXd::LinSpaced(count, std::log(lo), std::log(hi)).array().exp();
  }
  return Eigen::VectorXd::LinSpaced(count, lo, hi);
}

// ---------------------------------------------------------------------------

int run_spectrum(const ChainOptions& chain, const OutputOptions& out) {
  const auto spec = chain.spec();
  const auto s = dispersion(spec);
  Report report;
  report.command = "spectrum";
  report.params = chain.params();
  report.columns = {"m", "k", "omega"};
  for (Eigen::Index m = 0; m < spec.n; ++m)
    report.rows.push_back({json(double(m)), json(s.wavenumbers[m]), json(s.frequencies[m])});
  emit(report, out.format, out.path);
  return kExitOk;
}

struct GreensOptions {
  double omega_min{0.0};
  double omega_max{0.0};
  Eigen::Index count{50};
  std::string spacing{"linear"};
  Eigen::Index p{0}, q{0};
  std::string kind{"sym"};
  std::string form{"trig"};
  bool verify{false};
  double tol{1e-8};
  bool time_domain{false};
  double fft_epsilon{0.0};      // default Omega_D/100
  double fft_omega_max{0.0};    // default from FftConfig::defaults_for
  Eigen::Index fft_samples{0};
};

// --time-domain: causal time-domain entry by inverse Fourier synthesis
// instead of the frequency sweep.
int run_greens_time_domain(const ChainSpec<>& spec, const GreensOptions& opt, json params,
                           const OutputOptions& out) {
  FftConfig<> cfg = FftConfig<>::defaults_for(spec);
  if (opt.fft_epsilon > 0) cfg.epsilon = opt.fft_epsilon;
  if (opt.fft_omega_max > 0) cfg.omega_max = opt.fft_omega_max;
  if (opt.fft_samples > 0) cfg.num_samples = opt.fft_samples;
  const auto signal = greens_time_domain(spec, opt.p, opt.q, cfg);

  Report report;
  report.command = "greens.time";
  report.params = std::move(params);
  report.params["fft_epsilon"] = cfg.epsilon;
  report.params["fft_omega_max"] = cfg.omega_max;
  report.params["fft_samples"] = double(cfg.num_samples);
  report.columns = {"t", "value"};
  double neg = 0, pos = 0;
  for (Eigen::Index i = 0; i < signal.times.size(); ++i) {
    report.rows.push_back({json(signal.times[i]), json(signal.values[i])});
    if (signal.times[i] < 0.0)
      neg = std::max(neg, std::abs(signal.values[i]));
    else
      pos = std::max(pos, std::abs(signal.values[i]));
  }
  report.summary["causality_ratio"] = neg / pos;
  emit(report, out.format, out.path);
  return kExitOk;
}

int run_greens(const ChainOptions& chain, const GreensOptions& opt, const OutputOptions& out) {
  const auto spec = chain.spec();
  validate(spec);
  if (opt.time_domain) {
    json params = chain.params();
    params["p"] = double(opt.p);
    params["q"] = double(opt.q);
    return run_greens_time_domain(spec, opt, std::move(params), out);
  }
  const double hi = spec.upper_band_edge();
  const double hi_grid = opt.omega_max > 0 ? opt.omega_max : 2.0 * hi;
  const auto grid = frequency_grid(opt.omega_min, hi_grid, opt.count, opt.spacing);
  const GreensKind kind = opt.kind == "true" ? GreensKind::TrueDisplacement : GreensKind::Symmetric;
  const ClosedForm form = opt.form == "radical" ? ClosedForm::Radical : ClosedForm::Trigonometric;
  const double eps_in_band = 3.0 * (hi - spec.lower_band_edge()) / double(spec.n);
  const double true_scale = std::pow(spec.xi, double(opt.q - opt.p));

  Report report;
  report.command = "greens";
  report.params = chain.params();
  report.params["p"] = double(opt.p);
  report.params["q"] = double(opt.q);
  report.params["kind"] = opt.kind;
  report.params["form"] = opt.form;
  report.params["verify"] = opt.verify;
  if (opt.verify) report.params["tol"] = opt.tol;
  report.columns = {"omega", "regime", "re", "im"};
  if (opt.verify) {
    report.columns.push_back("oracle_re");
    report.columns.push_back("oracle_im");
    report.columns.push_back("deviation");
  }

  double max_dev = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double omega = grid[i];
    std::vector<json> row{json(omega)};
    try {
      const auto eval = kind == GreensKind::Symmetric
                            ? greens_closed_form(spec, {omega}, opt.p, opt.q, form)
                            : greens_true(spec, {omega}, opt.p, opt.q, form);
      row.push_back(json(regime_name(eval.regime.regime)));
      row.push_back(json(eval.value.real()));
      row.push_back(json(eval.value.imag()));
      if (opt.verify) {
        const double eps = eval.regime.regime == Regime::InBand ? eps_in_band : 0.0;
        std::complex<double> oracle = greens_spectral_sum(spec, omega, eps, opt.p, opt.q);
        if (kind == GreensKind::TrueDisplacement) oracle *= true_scale;
        const double dev = std::abs(eval.value - oracle) / std::abs(eval.value);
        max_dev = std::max(max_dev, dev);
        row.push_back(json(oracle.real()));
        row.push_back(json(oracle.imag()));
        row.push_back(json(dev));
      }
    } catch (const BandEdgeSingularity&) {
      row.push_back(json("singular"));
      while (row.size() < report.columns.size()) row.push_back(json());
    }
    report.rows.push_back(std::move(row));
  }
  if (opt.verify) {
    report.summary["max_deviation"] = max_dev;
    report.summary["tol"] = opt.tol;
    report.summary["verdict"] = max_dev <= opt.tol ? "pass" : "fail";
  }
  emit(report, out.format, out.path);
  return opt.verify && max_dev > opt.tol ? kExitVerifyFailed : kExitOk;
}

int run_density(const ChainOptions& chain, Eigen::Index count, double margin, double quad_tol,
                const OutputOptions& out) {
  const auto spec = chain.spec();
  const auto curve = sample_mode_density(spec, count, margin);
  QuadratureConfig<> quad;
  quad.rel_tol = quad_tol;
  const double integral = normalization_integral(spec, quad);

  Report report;
  report.command = "density";
  report.params = chain.params();
  report.params["count"] = double(count);
  report.params["margin"] = margin;
  report.columns = {"omega", "rho"};
  for (Eigen::Index i = 0; i < curve.omegas.size(); ++i)
    report.rows.push_back({json(curve.omegas[i]), json(curve.rho[i])});
  report.summary["integral"] = integral;
  report.summary["integral_deviation"] = integral - double(spec.n);
  emit(report, out.format, out.path);
  return kExitOk;
}

struct ContinuumOptions {
  double length{1.0};
  double beta{1.0};
  double big_omega{1.0};
  double rho0{1.0};
  std::vector<Eigen::Index> rungs{64, 128, 256, 512};
  long mode{3};
  double gf_x{-1.0};  // default L/8
  std::string domain{"infinite"};
  Eigen::Index samples{100};
  double omega_max{-1.0};

  ContinuumSpec<> spec() const { return {length, beta, big_omega, rho0}; }
  json params() const {
    json j{{"length", length}, {"beta", beta},   {"Omega", big_omega},   {"rho0", rho0},
           {"mode", double(mode)}, {"gf_x", gf_x}, {"domain", domain}, {"samples", double(samples)}};
    json r = json::array();
    for (auto n : rungs) r.push_back(double(n));
    j["rungs"] = r;
    return j;
  }
};

int run_continuum(const ContinuumOptions& opt, const OutputOptions& out) {
  const auto spec = opt.spec();
  validate(spec);
  const DomainMode mode = opt.domain == "periodic" ? DomainMode::Periodic : DomainMode::Infinite;
  const double edge = spec.lower_band_edge();
  const double gf_x = opt.gf_x >= 0 ? opt.gf_x : spec.length / 8.0;
  const double omega_hi =
      opt.omega_max > 0 ? opt.omega_max
                        : (spec.beta > 0 ? 4.0 * edge : 4.0 * spec.big_omega / spec.length);
  const double omega_below = 0.5 * edge;
  const double omega_above = spec.beta > 0 ? 2.0 * edge : omega_hi / 2.0;

  Report conv;
  conv.command = "continuum";
  conv.params = opt.params();
  conv.columns = {"h",          "disp_err",     "disp_order",     "gf_below_err", "gf_below_order",
                  "gf_above_err", "gf_above_order", "kg_err",     "kg_order"};
  const auto disp_rows = dispersion_convergence(spec, opt.mode, opt.rungs);
  const auto kg_rows = kg_operator_convergence(spec, opt.mode, opt.rungs);
  const auto above_rows = greens_convergence(spec, omega_above, gf_x, opt.rungs);
  std::vector<ConvergenceRow<>> below_rows;
  if (spec.beta > 0) below_rows = greens_convergence(spec, omega_below, gf_x, opt.rungs);
  for (std::size_t r = 0; r < disp_rows.size(); ++r) {
    std::vector<json> row{json(disp_rows[r].h), json(disp_rows[r].error),
                          json(disp_rows[r].observed_order)};
    if (spec.beta > 0) {
      row.push_back(json(below_rows[r].error));
      row.push_back(json(below_rows[r].observed_order));
    } else {
      row.push_back(json());
      row.push_back(json());
    }
    row.push_back(json(above_rows[r].error));
    row.push_back(json(above_rows[r].observed_order));
    row.push_back(json(kg_rows[r].error));
    row.push_back(json(kg_rows[r].observed_order));
    conv.rows.push_back(std::move(row));
  }

  Report gf;
  gf.command = "continuum.greens";
  gf.params = opt.params();
  gf.columns = {"x", "re_above", "im_above", "re_below", "im_below"};
  for (Eigen::Index i = 0; i < opt.samples; ++i) {
    const double x = spec.length * double(i) / double(std::max<Eigen::Index>(1, opt.samples - 1));
    const auto above = continuum_greens(spec, omega_above, x, mode);
    std::vector<json> row{json(x), json(above.real()), json(above.imag())};
    if (spec.beta > 0) {
      const auto below = continuum_greens(spec, omega_below, x, mode);
      row.push_back(json(below.real()));
      row.push_back(json(below.imag()));
    } else {
      row.push_back(json());
      row.push_back(json());
    }
    gf.rows.push_back(std::move(row));
  }
  gf.summary["omega_above"] = omega_above;
  if (spec.beta > 0) gf.summary["omega_below"] = omega_below;

  Report dens;
  dens.command = "continuum.density";
  dens.params = opt.params();
  dens.columns = {"omega", "rho"};
  const double dens_lo = spec.beta > 0 ? edge * (1.0 + 1e-6) : omega_hi / double(opt.samples);
  for (Eigen::Index i = 0; i < opt.samples; ++i) {
    const double omega = dens_lo + (omega_hi - dens_lo) * double(i) /
                                       double(std::max<Eigen::Index>(1, opt.samples - 1));
    dens.rows.push_back({json(omega), json(continuum_mode_density(spec, omega))});
  }

  if (out.format == "json") {
    json j;
    j["command"] = "continuum";
    j["params"] = conv.params;
    j["convergence"] = render_json(conv)["results"];
    j["greens_samples"] = render_json(gf)["results"];
    j["density_samples"] = render_json(dens)["results"];
    j["summary"] = gf.summary;
    write_text(out.path, j.dump(2) + "\n");
  } else {
    emit(conv, out.format, out.path);
    emit(gf, out.format, derived_path(out.path, "greens"));
    emit(dens, out.format, derived_path(out.path, "density"));
  }
  return kExitOk;
}

struct EvolveOptions {
  std::string preset{"single-mode"};
  Eigen::Index mode{1};
  double amplitude{1.0};
  unsigned seed{0};
  double t_max{20.0};
  Eigen::Index samples{200};
};

int run_evolve(const ChainOptions& chain, const EvolveOptions& opt, const OutputOptions& out) {
  const auto spec = chain.spec();
  validate(spec);
  const auto s = dispersion(spec);

  InitialConditions<> ic;
  ic.u0 = Eigen::VectorXd::Zero(spec.n);
  ic.v0 = Eigen::VectorXd::Zero(spec.n);
  if (opt.preset == "single-mode") {
    if (opt.mode < 0 || opt.mode >= spec.n) throw std::invalid_argument("mode: must lie in [0, n)");
    for (Eigen::Index p = 0; p < spec.n; ++p)
      ic.u0[p] = opt.amplitude * std::pow(spec.xi, -double(p)) *
                 std::cos(s.wavenumbers[opt.mode] * double(p));
  } else if (opt.preset == "pulse") {
    ic.u0[0] = opt.amplitude;
  } else if (opt.preset == "random") {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, opt.amplitude);
    for (auto& x : ic.u0) x = gauss(rng);
    for (auto& x : ic.v0) x = gauss(rng);
  } else {
    throw std::invalid_argument("preset: must be one of single-mode, pulse, random");
  }

  const auto coeffs = fit_modal_coefficients(spec, ic);
  const double h0 = total_energy(spec, ic.u0, ic.v0);

  Report report;
  report.command = "evolve";
  report.params = chain.params();
  report.params["preset"] = opt.preset;
  report.params["mode"] = double(opt.mode);
  report.params["amplitude"] = opt.amplitude;
  report.params["seed"] = double(opt.seed);
  report.params["t_max"] = opt.t_max;
  report.params["samples"] = double(opt.samples);
  report.columns = {"t"};
  for (Eigen::Index p = 0; p < spec.n; ++p) report.columns.push_back("u" + std::to_string(p));
  report.columns.push_back("energy");

  double drift = 0.0;
  for (Eigen::Index i = 0; i < opt.samples; ++i) {
    const double t = opt.t_max * double(i) / double(std::max<Eigen::Index>(1, opt.samples - 1));
    const Eigen::VectorXd u = evolve(spec, coeffs, t).real();
    const Eigen::VectorXd v = evolve_velocity(spec, coeffs, t).real();
    const double h = total_energy(spec, u, v);
    if (h0 > 0) drift = std::max(drift, std::abs(h - h0) / h0);
    std::vector<json> row{json(t)};
    for (Eigen::Index p = 0; p < spec.n; ++p) row.push_back(json(u[p]));
    row.push_back(json(h));
    report.rows.push_back(std::move(row));
  }
  report.summary["energy_drift"] = drift;

  if (spec.xi != 1.0) {
    // spot check of the scaling relation u_{p+N}(t) = xi^{-N} u_p(t)
    const double t_probe = 0.5 * opt.t_max;
    double worst = 0.0;
    for (long p : {0L, long(spec.n) / 2}) {
      const auto inside = evolve_at_site(spec, coeffs, t_probe, p);
      const auto outside = evolve_at_site(spec, coeffs, t_probe, p + long(spec.n));
      worst =
          std::max(worst, std::abs(outside - std::pow(spec.xi, -double(spec.n)) * inside));
    }
    report.summary["scaling_relation_max_dev"] = worst;
  }
  emit(report, out.format, out.path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyOutcome {
  int checks = 0;
  int failures = 0;
  void record(const std::string& name, bool ok, const std::string& detail) {
    ++checks;
    if (!ok) ++failures;
    std::cout << (ok ? "PASS  " : "FAIL  ") << name << "  (" << detail << ")\n";
  }
};

int run_verify(double tol, unsigned seed) {
  VerifyOutcome out;

  for (double xi : {0.3, 1.0, 2.0, 10.0}) {
    const auto report = verify_spectrum(ChainSpec<>{64, xi, 1.0, 1.0}, 1e-9);
    out.record("spectrum xi=" + fmt17(xi), report.passed,
               "rel dev " + fmt17(report.max_rel_deviation));
  }

  {
    ChainSpec<> spec{256, 2.0, 1.0, 1.0};
    const double g0 = greens_closed_form(spec, {0.0}, 0, 0).value.real();
    const double g1 = greens_closed_form(spec, {0.0}, 0, 1).value.real();
    const auto o0 = greens_spectral_sum(spec, 0.0, 0.0, Eigen::Index(0), Eigen::Index(0));
    const auto o1 = greens_spectral_sum(spec, 0.0, 0.0, Eigen::Index(0), Eigen::Index(1));
    const double dev = std::max(std::abs(g0 - o0.real()), std::abs(g1 - o1.real()));
    out.record("static worked value", dev < 1e-9 && std::abs(g0 - 4.0 / 3.0) < 1e-12,
               "dev " + fmt17(dev));
  }

  for (double xi : {0.5, 2.0}) {
    ChainSpec<> spec{256, xi, 1.0, 1.0};
    const auto [lo, hi] = band_edges(spec);
    double worst = 0.0;
    for (double omega : {0.0, 0.9 * lo, 1.1 * hi, 2.0 * hi}) {
      const auto cf = greens_closed_form(spec, {omega}, 0, 0).value;
      const auto ss = greens_spectral_sum(spec, omega, 0.0, Eigen::Index(0), Eigen::Index(0));
      const auto di = greens_dense_inverse(spec, omega, 0.0)(0, 0);
      worst = std::max({worst, std::abs(cf - ss) / std::abs(cf), std::abs(cf - di) / std::abs(cf)});
    }
    out.record("out-of-band oracle agreement xi=" + fmt17(xi), worst < tol,
               "max rel dev " + fmt17(worst));
  }

  {
    double worst = 0.0;
    worst =
        std::max(worst, std::abs(normalization_integral(ChainSpec<>{100, 2.0, 1.0, 1.0}) - 100.0));
    worst =
        std::max(worst, std::abs(normalization_integral(ChainSpec<>{100, 1.0, 1.0, 1.0}) - 100.0));
    worst = std::max(worst, std::abs(normalization_integral(ChainSpec<>{7, 10.0, 1.0, 1.0}) - 7.0));
    out.record("mode-density normalization", worst < 1e-8, "max |I - N| " + fmt17(worst));
  }

  {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    ChainSpec<> spec{64, 2.0, 1.0, 1.0};
    const auto [lo, hi] = band_edges(spec);
    double worst = 0.0;
    for (int rep = 0; rep < 32; ++rep) {
      const double omega = lo + u(rng) * (hi - lo);
      const double a = mode_density(spec, omega);
      const double b = mode_density_from_greens(spec, omega);
      worst = std::max(worst, std::abs(a - b) / a);
    }
    out.record("density route identity", worst < 1e-10, "max rel dev " + fmt17(worst));
  }

  {
    std::mt19937 rng(seed + 1);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u(8);
    for (auto& x : u) x = gauss(rng);
    const auto report = hamiltonian_force_check(ChainSpec<>{8, 2.0, 1.0, 1.0}, u, 1e-6);
    out.record("hamiltonian force check", report.passed, "rel err " + fmt17(report.max_rel_error));
  }

  {
    ChainSpec<> spec{8, 2.0, 1.0, 1.0};
    std::mt19937 rng(seed + 2);
    std::normal_distribution<double> gauss;
    InitialConditions<> ic;
    ic.u0.resize(8);
    ic.v0.resize(8);
    for (auto& x : ic.u0) x = gauss(rng);
    for (auto& x : ic.v0) x = gauss(rng);
    const auto coeffs = fit_modal_coefficients(spec, ic);
    const double err0 = (evolve(spec, coeffs, 0.0).real() - ic.u0).cwiseAbs().maxCoeff();
    const double h0 = total_energy(spec, ic.u0, ic.v0);
    double drift = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double t = 100.0 * double(i);
      drift = std::max(drift,
                       std::abs(total_energy(spec, evolve(spec, coeffs, t).real().eval(),
                                             evolve_velocity(spec, coeffs, t).real().eval()) -
                                h0) /
                           h0);
    }
    out.record("modal round trip + conservation", err0 < 1e-10 && drift < 1e-9,
               "t0 err " + fmt17(err0) + ", drift " + fmt17(drift));
  }

  {
    ContinuumSpec<> cspec{1.0, 1.0, 1.0, 1.0};
    double worst = 0.0;
    for (double omega : {1.3, 2.0, 7.0}) {
      const double a = continuum_mode_density(cspec, omega);
      const double b = continuum_mode_density_from_greens(cspec, omega);
      worst = std::max(worst, std::abs(a - b) / a);
    }
    const bool helm =
        helmholtz_residual(cspec, 0.5).passed && helmholtz_residual(cspec, 2.0).passed;
    out.record("continuum density routes + Helmholtz", worst < 1e-12 && helm,
               "route dev " + fmt17(worst));
  }

  std::cout << (out.failures == 0 ? "VERIFY: passed " : "VERIFY: FAILED ") << out.checks
            << " checks" << (out.failures ? (", " + std::to_string(out.failures) + " failed") : "")
            << "\n";
  return out.failures == 0 ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice dynamics of the exponentially graded harmonic chain"};
  app.require_subcommand(1);

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Bloch wavenumbers and eigenfrequencies");
  ChainOptions spectrum_chain;
  OutputOptions spectrum_out;
  spectrum_chain.register_on(spectrum_cmd);
  spectrum_out.register_on(spectrum_cmd);

  auto* greens_cmd = app.add_subcommand("greens", "frequency-domain Green's function sweep");
  ChainOptions greens_chain;
  OutputOptions greens_out;
  GreensOptions greens_opt;
  greens_chain.register_on(greens_cmd);
  greens_out.register_on(greens_cmd);
  greens_cmd->add_option("--omega-min", greens_opt.omega_min, "sweep start [rad/s]");
  greens_cmd->add_option("--omega-max", greens_opt.omega_max,
                         "sweep end [rad/s]; default 2 Omega_D");
  greens_cmd->add_option("--omega-count", greens_opt.count, "grid size");
  greens_cmd->add_option("--spacing", greens_opt.spacing, "grid spacing")
      ->check(CLI::IsMember({"linear", "log"}));
  greens_cmd->add_option("--p", greens_opt.p, "row index");
  greens_cmd->add_option("--q", greens_opt.q, "column index");
  greens_cmd
      ->add_option("--kind", greens_opt.kind, "sym (transformed field) or true (displacements)")
      ->check(CLI::IsMember({"sym", "true"}));
  greens_cmd->add_option("--form", greens_opt.form, "closed-form route")
      ->check(CLI::IsMember({"trig", "radical"}));
  greens_cmd->add_flag("--verify", greens_opt.verify, "compare against the spectral-sum oracle");
  greens_cmd->add_option("--tol", greens_opt.tol, "verification tolerance");
  greens_cmd->add_flag("--time-domain", greens_opt.time_domain,
                       "write the causal time-domain entry (t, value) instead of the sweep");
  greens_cmd->add_option("--fft-epsilon", greens_opt.fft_epsilon,
                         "damping for the synthesis; default Omega_D/100");
  greens_cmd->add_option("--fft-omega-max", greens_opt.fft_omega_max,
                         "frequency-grid extent; default >= 8 Omega_D");
  greens_cmd->add_option("--fft-samples", greens_opt.fft_samples, "FFT length (even)");

  auto* density_cmd = app.add_subcommand("density", "vibrational mode density");
  ChainOptions density_chain;
  OutputOptions density_out;
  Eigen::Index density_count = 200;
  double density_margin = 1e-6;
  double density_quad_tol = 1e-10;
  density_chain.register_on(density_cmd);
  density_out.register_on(density_cmd);
  density_cmd->add_option("--count", density_count, "sample count");
  density_cmd->add_option("--margin", density_margin, "relative edge margin of the sample grid");
  density_cmd->add_option("--quad-tol", density_quad_tol,
                          "tolerance of the normalization integral");

  auto* continuum_cmd = app.add_subcommand("continuum", "continuum limit: convergence and kernels");
  OutputOptions continuum_out;
  ContinuumOptions continuum_opt;
  continuum_cmd->add_option("--length", continuum_opt.length, "domain length L [m]");
  continuum_cmd->add_option("--beta", continuum_opt.beta, "grading rate [1/m]");
  continuum_cmd->add_option("--Omega", continuum_opt.big_omega, "wave speed [m/s]");
  continuum_cmd->add_option("--rho0", continuum_opt.rho0, "base mass density [kg/m]");
  continuum_cmd->add_option("--rungs", continuum_opt.rungs, "ladder sizes (N per rung)");
  continuum_cmd->add_option("--mode", continuum_opt.mode, "mode index for the dispersion study");
  continuum_cmd->add_option("--gf-x", continuum_opt.gf_x, "observation point [m]; default L/8");
  continuum_cmd->add_option("--domain", continuum_opt.domain, "infinite or periodic")
      ->check(CLI::IsMember({"infinite", "periodic"}));
  continuum_cmd->add_option("--samples", continuum_opt.samples,
                            "sample count for kernels/density");
  continuum_cmd->add_option("--omega-max", continuum_opt.omega_max, "density sweep end [rad/s]");
  continuum_out.register_on(continuum_cmd);

  auto* evolve_cmd = app.add_subcommand("evolve", "modal time evolution");
  ChainOptions evolve_chain;
  OutputOptions evolve_out;
  EvolveOptions evolve_opt;
  evolve_chain.register_on(evolve_cmd);
  evolve_out.register_on(evolve_cmd);
  evolve_cmd->add_option("--preset", evolve_opt.preset, "single-mode, pulse, or random")
      ->check(CLI::IsMember({"single-mode", "pulse", "random"}));
  evolve_cmd->add_option("--mode", evolve_opt.mode, "Bloch index for single-mode");
  evolve_cmd->add_option("--amplitude", evolve_opt.amplitude, "initial amplitude [m]");
  evolve_cmd->add_option("--seed", evolve_opt.seed, "random preset seed");
  evolve_cmd->add_option("--t-max", evolve_opt.t_max, "final time [s]");
  evolve_cmd->add_option("--samples", evolve_opt.samples, "output rows");

  auto* verify_cmd = app.add_subcommand("verify", "run the built-in verification battery");
  double verify_tol = 1e-8;
  unsigned verify_seed = 0;
  verify_cmd->add_option("--tol", verify_tol, "oracle-agreement tolerance");
  verify_cmd->add_option("--seed", verify_seed, "seed for randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (spectrum_cmd->parsed()) {
      apply_json_config(spectrum_cmd, spectrum_out.config_path);
      return run_spectrum(spectrum_chain, spectrum_out);
    }
    if (greens_cmd->parsed()) {
      apply_json_config(greens_cmd, greens_out.config_path);
      return run_greens(greens_chain, greens_opt, greens_out);
    }
    if (density_cmd->parsed()) {
      apply_json_config(density_cmd, density_out.config_path);
      return run_density(density_chain, density_count, density_margin, density_quad_tol,
                         density_out);
    }
    if (continuum_cmd->parsed()) {
      apply_json_config(continuum_cmd, continuum_out.config_path);
      return run_continuum(continuum_opt, continuum_out);
    }
    if (evolve_cmd->parsed()) {
      apply_json_config(evolve_cmd, evolve_out.config_path);
      return run_evolve(evolve_chain, evolve_opt, evolve_out);
    }
    if (verify_cmd->parsed()) return run_verify(verify_tol, verify_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const GradingOverflow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const BandEdgeSingularity& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}
