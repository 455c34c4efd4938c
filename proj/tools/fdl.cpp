#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdl/errors.hpp"
#include "fdl/hls.hpp"
#include "fdl/io.hpp"
#include "fdl/nls.hpp"
#include "fdl/propagator.hpp"
#include "fdl/selfaffine.hpp"

namespace {

constexpr const char* kVersion = "fdl 1.0.0";

using nlohmann::json;

std::string fmt(double x) { return fdl::io::format_double(x); }

int to_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (...) {
    fdl::fail(fdl::ErrorKind::BadConfig, "not an integer: " + s);
  }
  if (pos != s.size())
    fdl::fail(fdl::ErrorKind::BadConfig, "not an integer: " + s);
  return v;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    fdl::fail(fdl::ErrorKind::BadConfig, "not a number: " + s);
  }
  if (pos != s.size())
    fdl::fail(fdl::ErrorKind::BadConfig, "not a number: " + s);
  return v;
}

// "3" -> [3,3], "2:6" -> [2,6]
std::pair<int, int> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const int v = to_int(s);
    if (v < 1) fdl::fail(fdl::ErrorKind::BadConfig, "level must be >= 1");
    return {v, v};
  }
  const int lo = to_int(s.substr(0, colon));
  const int hi = to_int(s.substr(colon + 1));
  if (lo < 1 || hi < lo)
    fdl::fail(fdl::ErrorKind::BadConfig, "bad level range: " + s);
  return {lo, hi};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(start, end - start);
    if (!tok.empty()) out.push_back(to_double(tok));
    start = end + 1;
  }
  return out;
}

struct Manifest {
  std::string command;
  json params = json::object();
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::string started;
  json extra = json::object();
};

void write_manifest(const Manifest& m, const std::string& path,
                    int exit_status) {
  json doc;
  doc["command"] = m.command;
  doc["params"] = m.params;
  json in = json::object();
  for (const auto& f : m.inputs) in[f] = fdl::io::hash_file(f);
  doc["inputs"] = in;
  doc["seed"] = m.seed;
  doc["version"] = kVersion;
  doc["started"] = m.started;
  doc["finished"] = fdl::io::iso8601_now();
  doc["exit_status"] = exit_status;
  for (auto it = m.extra.begin(); it != m.extra.end(); ++it)
    doc[it.key()] = it.value();
  fdl::io::atomic_write(path, doc.dump(2) + "\n");
}

// The config file holds flag names (no leading dashes) mapped to values.
// Its tokens are spliced in right after the subcommand words, so explicit
// command line flags win under the take-last policy.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        fdl::fail(fdl::ErrorKind::BadConfig, "--config needs a file");
      path = args[i + 1];
      ++i;
      continue;
    }
    rest.push_back(args[i]);
  }
  if (path.empty()) return rest;

  json cfg;
  try {
    cfg = json::parse(fdl::io::read_file(path));
  } catch (const fdl::Error&) {
    throw;
  } catch (const std::exception& e) {
    fdl::fail(fdl::ErrorKind::BadConfig,
              std::string("config parse failed: ") + e.what());
  }
  if (!cfg.is_object())
    fdl::fail(fdl::ErrorKind::BadConfig, "config must be a JSON object");

  std::size_t pos = 0;
  while (pos < rest.size() && !rest[pos].empty() && rest[pos][0] != '-') ++pos;

  std::vector<std::string> synth;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) synth.push_back("--" + key);
      continue;
    }
    synth.push_back("--" + key);
    synth.push_back(value.is_string() ? value.get<std::string>()
                                      : value.dump());
  }
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(pos), synth.begin(),
              synth.end());
  return rest;
}

double rel_l2_gap(const fdl::WaveField& u, const fdl::WaveField& v) {
  fdl::WaveField d = u;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= v.values[i];
  const double ref = fdl::norm_l2(v);
  return ref > 0.0 ? fdl::norm_l2(d) / ref : fdl::norm_l2(d);
}

struct CurveBuildOpts {
  std::int64_t a = 2;
  std::int64_t b = 4;
  std::string m = "++-+";
  std::string d = "--+-";
  int level = 1;
  std::string out = "curve.json";
};

int run_curve_build(const CurveBuildOpts& o, const std::string& cmdline) {
  Manifest man;
  man.command = cmdline;
  man.started = fdl::io::iso8601_now();
  const fdl::Pattern pat = fdl::validate_pattern(
      o.a, o.b, fdl::parse_steps(o.m), fdl::parse_steps(o.d));
  const fdl::Curve c = fdl::build(pat, o.level);
  fdl::save(c, o.out);
  const fdl::AssumptionReport rep = fdl::assumption_constant(c);
  const fdl::PieceFamily fam = fdl::family_of_pieces(c, 1);
  std::cout << "H = " << fmt(c.order()) << "\n";
  std::cout << "C = " << fmt(rep.c_constant) << "\n";
  std::cout << "N = " << fam.count() << "\n";
  man.params = {{"a", o.a},         {"b", o.b},   {"m", o.m},
                {"d", o.d},         {"level", o.level}, {"out", o.out}};
  write_manifest(man, o.out + ".manifest.json", 0);
  return 0;
}

struct HlsOpts {
  std::string curve;
  double alpha = 0.5;
  std::string levels;
  int trials = 16;
  std::uint64_t seed = 0;
  double p = 0.0;
  double q = 0.0;
  std::string out = "hls";
};

int run_hls(const HlsOpts& o, const std::string& cmdline) {
  Manifest man;
  man.command = cmdline;
  man.started = fdl::io::iso8601_now();
  man.inputs = {o.curve};
  man.seed = o.seed;

  const fdl::Curve c = fdl::load(o.curve);
  const auto [lo, hi] = parse_range(
      o.levels.empty() ? "1:" + std::to_string(c.level) : o.levels);
  if (hi > c.level)
    fdl::fail(fdl::ErrorKind::BadConfig, "levels exceed the curve level");
  const bool explicit_pq = o.p > 0.0 || o.q > 0.0;
  const fdl::HlsExponents e =
      explicit_pq ? fdl::make_exponents(o.alpha, c.order(), o.p, o.q)
                  : fdl::symmetric_exponents(o.alpha, c.order());

  const fdl::WorstCaseReport report =
      fdl::worst_case_search(c, e, o.trials, o.seed);
  const std::vector<fdl::ScalingRow> scaling = fdl::scaling_check(c, o.alpha);

  std::string body = "level,alpha,p,q,max_iota_normalized,max_ratio,argmax_id\n";
  double max_ratio = 0.0;
  std::string argmax_id;
  int argmax_level = 0;
  for (int n = lo; n <= hi; ++n) {
    const auto& wr = report.rows.at(static_cast<std::size_t>(n - 1));
    const auto& sr = scaling.at(static_cast<std::size_t>(n - 1));
    if (wr.max_ratio > max_ratio) {
      max_ratio = wr.max_ratio;
      argmax_id = wr.argmax_id;
      argmax_level = n;
    }
    body += std::to_string(n) + "," + fmt(o.alpha) + "," + fmt(e.p) + "," +
            fmt(e.q) + "," + fmt(sr.normalized) + "," + fmt(wr.max_ratio) +
            "," + wr.argmax_id + "\n";
  }
  fdl::io::atomic_write(o.out + ".csv", body);

  json summary;
  summary["curve"] = o.curve;
  summary["curve_hash"] = fdl::io::hash_file(o.curve);
  summary["seed"] = o.seed;
  summary["trials"] = o.trials;
  summary["alpha"] = o.alpha;
  summary["p"] = e.p;
  summary["q"] = e.q;
  summary["h"] = e.h;
  summary["levels"] = {lo, hi};
  summary["max_ratio"] = max_ratio;
  summary["argmax_id"] = argmax_id;
  summary["argmax_level"] = argmax_level;
  summary["tolerances"] = {{"quadrature_rel_tol", 1e-8}};
  fdl::io::atomic_write(o.out + ".json", summary.dump(2) + "\n");

  man.params = {{"curve", o.curve}, {"alpha", o.alpha},
                {"levels", std::to_string(lo) + ":" + std::to_string(hi)},
                {"trials", o.trials}, {"seed", o.seed},
                {"p", e.p},           {"q", e.q},
                {"out", o.out}};
  write_manifest(man, o.out + ".manifest.json", 0);
  return 0;
}

struct StrichartzOpts {
  std::string curve;
  double p = 0.0;
  double q = 0.0;
  bool auto_q = false;
  std::string levels;
  int min_width_exp = 5;
  bool zero_field = false;
  std::string out = "strichartz";
};

int run_strichartz(const StrichartzOpts& o, const std::string& cmdline) {
  Manifest man;
  man.command = cmdline;
  man.started = fdl::io::iso8601_now();
  man.inputs = {o.curve};

  const fdl::Curve c = fdl::load(o.curve);
  const double h = c.order();
  double q = o.q;
  if (o.auto_q) {
    if (o.q != 0.0)
      fdl::fail(fdl::ErrorKind::BadConfig, "--q and --auto-q are exclusive");
    q = fdl::admissible_q(o.p, h, 1);
    std::cout << "q = " << fmt(q) << "\n";
  } else if (q == 0.0) {
    fdl::fail(fdl::ErrorKind::BadConfig, "need --q or --auto-q");
  }
  const fdl::AdmissiblePair pr = fdl::make_pair(q, o.p, h, 1);
  const auto [lo, hi] = parse_range(
      o.levels.empty() ? std::to_string(c.level) : o.levels);
  if (o.min_width_exp < 0)
    fdl::fail(fdl::ErrorKind::BadConfig, "--min-width-exp must be >= 0");

  std::string body = "level,q,p,width,ratio\n";
  for (int n = lo; n <= hi; ++n) {
    for (int k = 0; k <= o.min_width_exp; ++k) {
      // narrow data disperses wider, so the box and the mesh both scale
      // with the width
      const double width = std::ldexp(1.0, -k);
      const double len = std::max(64.0, std::ldexp(1.0, k + 5));
      const double dx = std::ldexp(1.0, -(k + 2));
      const auto g =
          fdl::make_grid(1, static_cast<fdl::i64>(std::llround(len / dx)), len);
      const fdl::WaveField f =
          o.zero_field ? fdl::make_field(g) : fdl::gaussian_field(g, width);
      const fdl::StrichartzResult res = fdl::strichartz_norm(f, pr, c, n);
      body += std::to_string(n) + "," + fmt(q) + "," + fmt(o.p) + "," +
              fmt(width) + "," + fmt(res.ratio) + "\n";
    }
  }
  fdl::io::atomic_write(o.out + ".csv", body);

  man.params = {{"curve", o.curve},
                {"p", o.p},
                {"q", q},
                {"auto_q", o.auto_q},
                {"levels", std::to_string(lo) + ":" + std::to_string(hi)},
                {"min_width_exp", o.min_width_exp},
                {"zero_field", o.zero_field},
                {"out", o.out}};
  write_manifest(man, o.out + ".manifest.json", 0);
  return 0;
}

struct NlsOpts {
  std::string curve;
  double sigma = 1.0;
  double lambda = 0.0;
  double T = 1.0;
  int time_level = 4;
  std::int64_t grid = 256;
  double domain = 64.0;
  double width = 1.0;
  std::string method = "strang";
  int iters = 10;
  std::string out = "nls";
};

fdl::Method parse_method(const std::string& s) {
  if (s == "lie") return fdl::Method::Lie;
  if (s == "strang") return fdl::Method::Strang;
  fdl::fail(fdl::ErrorKind::BadConfig, "method must be lie or strang");
}

fdl::SolverConfig solver_config(const NlsOpts& o) {
  fdl::SolverConfig cfg;
  cfg.sigma = o.sigma;
  cfg.lambda = o.lambda;
  cfg.T = o.T;
  cfg.time_level = o.time_level;
  cfg.method = parse_method(o.method);
  return cfg;
}

json nls_params(const NlsOpts& o) {
  return {{"curve", o.curve},   {"sigma", o.sigma},
          {"lambda", o.lambda}, {"T", o.T},
          {"time_level", o.time_level}, {"grid", o.grid},
          {"domain", o.domain}, {"width", o.width},
          {"method", o.method}, {"out", o.out}};
}

int run_nls_evolve(const NlsOpts& o, const std::string& cmdline) {
  Manifest man;
  man.command = cmdline;
  man.started = fdl::io::iso8601_now();
  if (!o.curve.empty()) man.inputs = {o.curve};

  const fdl::Curve c = o.curve.empty()
                           ? fdl::build(fdl::default_pattern(), o.time_level)
                           : fdl::load(o.curve);
  const fdl::SolverConfig cfg = solver_config(o);
  const auto g = fdl::make_grid(1, o.grid, o.domain);
  const fdl::WaveField psi0 = fdl::gaussian_field(g, o.width);
  const fdl::EvolveResult res = fdl::evolve(psi0, c, cfg);

  std::string body = "step,t,mass,peak,grad_norm\n";
  for (const auto& r : res.trace.rows)
    body += std::to_string(r.step) + "," + fmt(r.t) + "," + fmt(r.mass) + "," +
            fmt(r.peak) + "," + fmt(r.grad_norm) + "\n";
  fdl::io::atomic_write(o.out + ".csv", body);
  fdl::save_field(res.psi, o.out + ".field");

  const int code = res.status == fdl::RunStatus::Completed ? 0 : 2;
  man.params = nls_params(o);
  man.extra["status"] = code == 0 ? "completed" : "nan";
  man.extra["mixed_norm"] = res.trace.mixed_norm;
  man.extra["r"] = res.trace.r;
  man.extra["blowup_flag"] = res.trace.blowup_flag;
  if (o.lambda == 0.0 && code == 0) {
    // with no nonlinearity the whole run telescopes into one propagator
    // over the total curve displacement
    const fdl::i64 steps = fdl::step_count(cfg, c);
    const double tau =
        static_cast<double>(fdl::coarse_value(c, cfg.time_level, steps)) /
        static_cast<double>(fdl::checked_pow(c.pattern.a, c.level));
    const fdl::WaveField ref = fdl::apply_propagator(psi0, tau);
    man.extra["linear_reference_l2_error"] = rel_l2_gap(res.psi, ref);
  }
  write_manifest(man, o.out + ".manifest.json", code);
  if (code != 0)
    std::cerr << "NanDetected: evolution stopped at step "
              << res.trace.rows.size() << "\n";
  return code;
}

int run_nls_picard(const NlsOpts& o, const std::string& cmdline) {
  Manifest man;
  man.command = cmdline;
  man.started = fdl::io::iso8601_now();
  if (!o.curve.empty()) man.inputs = {o.curve};

  const fdl::Curve c = o.curve.empty()
                           ? fdl::build(fdl::default_pattern(), o.time_level)
                           : fdl::load(o.curve);
  const fdl::SolverConfig cfg = solver_config(o);
  const auto g = fdl::make_grid(1, o.grid, o.domain);
  const fdl::WaveField psi0 = fdl::gaussian_field(g, o.width);
  const fdl::PicardResult pr = fdl::picard_iterate(psi0, c, cfg, o.iters);

  std::string body = "iter,difference\n";
  for (std::size_t i = 0; i < pr.distances.size(); ++i)
    body += std::to_string(i + 1) + "," + fmt(pr.distances[i]) + "\n";
  fdl::io::atomic_write(o.out + ".csv", body);
  fdl::save_field(pr.sequence.back(), o.out + ".field");

  man.params = nls_params(o);
  man.params["iters"] = o.iters;
  man.extra["r"] = pr.r;
  write_manifest(man, o.out + ".manifest.json", 0);
  return 0;
}

struct ScanOpts {
  std::string sigmas;
  std::string control = "identity";
  std::string curve;
  double lambda = -1.0;
  double T = 1.0;
  int time_level = 4;
  std::int64_t grid = 128;
  double domain = 32.0;
  double width = 1.0;
  std::string out = "scan";
};

int run_scan(const ScanOpts& o, const std::string& cmdline) {
  Manifest man;
  man.command = cmdline;
  man.started = fdl::io::iso8601_now();
  if (!o.curve.empty()) man.inputs = {o.curve};

  if (o.control != "identity")
    fdl::fail(fdl::ErrorKind::BadConfig, "control must be identity");
  const std::vector<double> sigmas = parse_list(o.sigmas);
  const fdl::Curve mod = o.curve.empty()
                             ? fdl::build(fdl::default_pattern(), o.time_level)
                             : fdl::load(o.curve);
  fdl::SolverConfig base;
  base.lambda = o.lambda;
  base.T = o.T;
  base.time_level = o.time_level;
  base.method = fdl::Method::Strang;
  const auto g = fdl::make_grid(1, o.grid, o.domain);
  const fdl::WaveField psi0 = fdl::gaussian_field(g, o.width);

  const std::vector<fdl::ScanRow> rows =
      fdl::criticality_scan(psi0, mod, base, sigmas);

  std::string body = "sigma,control,peak_growth,grad_growth,mass_drift,status\n";
  for (const auto& r : rows)
    body += fmt(r.sigma) + "," + (r.control ? "identity" : "modulated") + "," +
            fmt(r.peak_growth) + "," + fmt(r.grad_growth) + "," +
            fmt(r.mass_drift) + "," +
            (r.status == fdl::RunStatus::Completed ? "completed" : "nan") +
            "\n";
  fdl::io::atomic_write(o.out + ".csv", body);

  json slist = json::array();
  for (double s : sigmas) slist.push_back(s);
  man.params = {{"sigmas", slist},   {"control", o.control},
                {"curve", o.curve},  {"lambda", o.lambda},
                {"T", o.T},          {"time_level", o.time_level},
                {"grid", o.grid},    {"domain", o.domain},
                {"width", o.width},  {"out", o.out}};
  write_manifest(man, o.out + ".manifest.json", 0);
  return 0;
}

int run(std::vector<std::string> args, const std::string& cmdline) {
  args = merge_config(std::move(args));

  CLI::App app{"modulated dispersion experiments"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* curve = app.add_subcommand("curve", "curve construction");
  curve->require_subcommand(1);
  CurveBuildOpts cbo;
  auto* cb = curve->add_subcommand("build", "build a curve from a pattern");
  cb->add_option("--a", cbo.a, "reach of both templates");
  cb->add_option("--b", cbo.b, "steps per template");
  cb->add_option("--m", cbo.m, "up template, + and - characters");
  cb->add_option("--d", cbo.d, "down template, + and - characters");
  cb->add_option("--level", cbo.level, "refinement level");
  cb->add_option("--out", cbo.out, "output curve file");

  HlsOpts ho;
  auto* hl = app.add_subcommand("hls", "bilinear sum ratios over a curve");
  hl->add_option("--curve", ho.curve, "curve file")->required();
  hl->add_option("--alpha", ho.alpha, "kernel exponent in (0,1)");
  hl->add_option("--levels", ho.levels, "level range lo:hi");
  hl->add_option("--trials", ho.trials, "random candidates per level");
  hl->add_option("--seed", ho.seed, "random seed");
  hl->add_option("--p", ho.p, "first exponent (default symmetric)");
  hl->add_option("--q", ho.q, "second exponent (default symmetric)");
  hl->add_option("--out", ho.out, "output prefix");

  StrichartzOpts so;
  auto* st = app.add_subcommand("strichartz", "ratio table over widths");
  st->add_option("--curve", so.curve, "curve file")->required();
  st->add_option("--p", so.p, "spatial exponent")->required();
  st->add_option("--q", so.q, "time exponent");
  st->add_flag("--auto-q", so.auto_q, "derive q from p and the curve order");
  st->add_option("--levels", so.levels, "level range lo:hi");
  st->add_option("--min-width-exp", so.min_width_exp,
                 "widths 2^0 down to 2^-this");
  st->add_flag("--zero-field", so.zero_field, "use the zero field");
  st->add_option("--out", so.out, "output prefix");

  auto* nls = app.add_subcommand("nls", "nonlinear evolutions");
  nls->require_subcommand(1);
  NlsOpts eo;
  auto* ev = nls->add_subcommand("evolve", "split-step evolution");
  ev->add_option("--curve", eo.curve, "curve file (default pattern if empty)");
  ev->add_option("--sigma", eo.sigma, "nonlinearity power");
  ev->add_option("--lambda", eo.lambda, "nonlinearity sign and size");
  ev->add_option("--T", eo.T, "final time in (0,1]");
  ev->add_option("--time-level", eo.time_level, "time grid level");
  ev->add_option("--grid", eo.grid, "spatial points");
  ev->add_option("--domain", eo.domain, "box side length");
  ev->add_option("--width", eo.width, "initial gaussian width");
  ev->add_option("--method", eo.method, "lie or strang");
  ev->add_option("--out", eo.out, "output prefix");

  NlsOpts po;
  po.out = "picard";
  auto* pi = nls->add_subcommand("picard", "fixed-point iteration");
  pi->add_option("--curve", po.curve, "curve file (default pattern if empty)");
  pi->add_option("--sigma", po.sigma, "nonlinearity power");
  pi->add_option("--lambda", po.lambda, "nonlinearity sign and size");
  pi->add_option("--T", po.T, "final time in (0,1]");
  pi->add_option("--time-level", po.time_level, "time grid level");
  pi->add_option("--grid", po.grid, "spatial points");
  pi->add_option("--domain", po.domain, "box side length");
  pi->add_option("--width", po.width, "initial gaussian width");
  pi->add_option("--iters", po.iters, "iteration count");
  pi->add_option("--out", po.out, "output prefix");

  ScanOpts ko;
  auto* sc = app.add_subcommand("scan", "sigma sweep against a control");
  sc->add_option("--sigmas", ko.sigmas, "comma separated powers")->required();
  sc->add_option("--control", ko.control, "control curve kind");
  sc->add_option("--curve", ko.curve, "curve file (default pattern if empty)");
  sc->add_option("--lambda", ko.lambda, "nonlinearity sign and size");
  sc->add_option("--T", ko.T, "final time in (0,1]");
  sc->add_option("--time-level", ko.time_level, "time grid level");
  sc->add_option("--grid", ko.grid, "spatial points");
  sc->add_option("--domain", ko.domain, "box side length");
  sc->add_option("--width", ko.width, "initial gaussian width");
  sc->add_option("--out", ko.out, "output prefix");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  if (cb->parsed()) return run_curve_build(cbo, cmdline);
  if (hl->parsed()) return run_hls(ho, cmdline);
  if (st->parsed()) return run_strichartz(so, cmdline);
  if (ev->parsed()) return run_nls_evolve(eo, cmdline);
  if (pi->parsed()) return run_nls_picard(po, cmdline);
  if (sc->parsed()) return run_scan(ko, cmdline);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string cmdline = "fdl";
  for (const auto& a : args) cmdline += " " + a;
  try {
    return run(std::move(args), cmdline);
  } catch (const fdl::Error& e) {
    std::cerr << e.what() << "\n";
    return fdl::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
