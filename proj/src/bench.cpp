#include "sgf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <random>
#include <sstream>

#include "sgf/error.hpp"

namespace sgf {

void RunConfig::validate() const {
  if (degree < 0 || degree > 2) throw Error(ErrorCode::ConfigError, "degree must be 0, 1 or 2");
  if (b != 0 && b < 2) throw Error(ErrorCode::ConfigError, "b must be >= 2");
  if (!(tol > 0.0 && tol < 1.0)) throw Error(ErrorCode::ConfigError, "tol must lie in (0, 1)");
  if (maxit < 1) throw Error(ErrorCode::ConfigError, "maxit must be >= 1");
  if (skip_first_levels < 0) throw Error(ErrorCode::ConfigError, "skip_first_levels must be >= 0");
  if (mode == CompressionMode::LowRankEquivalent && rank_trace_path.empty()) {
    throw Error(ErrorCode::ConfigError, "lowrank-equiv mode requires --rank-trace from a polynomial run");
  }
  const auto& p = problem;
  if (p.name != "poisson" && p.name != "darcy" && p.name != "elasticity" && p.name != "mtx") {
    throw Error(ErrorCode::ConfigError, "unknown problem '" + p.name + "'");
  }
  for (Index d : p.dims) {
    if (d < 1) throw Error(ErrorCode::ConfigError, "dims must be >= 1");
  }
  if (p.name == "mtx" && (p.matrix_path.empty() || p.coords_path.empty())) {
    throw Error(ErrorCode::ConfigError, "mtx problem needs a matrix and a coordinates file");
  }
}

ProblemInstance build_problem(const ProblemSpec& spec) {
  if (spec.name == "poisson") return poisson7(spec.dims[0], spec.dims[1], spec.dims[2]);
  if (spec.name == "darcy") {
    ScalarField f = spec.field_path.empty()
                        ? synth_perm_field(spec.dims, spec.layers, spec.contrast, spec.field_seed)
                        : read_perm_field(spec.field_path);
    if (spec.tile != std::array<Index, 3>{1, 1, 1}) f = tile_field(f, spec.tile);
    return darcy_tpfa(f);
  }
  if (spec.name == "elasticity") return elasticity_hex_beam(spec.refinement, spec.lame_left, spec.lame_right);
  if (spec.name == "mtx") return read_mtx(spec.matrix_path, spec.coords_path);
  throw Error(ErrorCode::ConfigError, "unknown problem '" + spec.name + "'");
}

std::vector<double> random_rhs(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> b(static_cast<std::size_t>(n));
  for (double& v : b) v = unif(rng);
  return b;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Re-raises library errors with the name of the failing stage.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.detail());
  }
}

FactorizeOptions options_for(const RunConfig& c) {
  FactorizeOptions o;
  o.scheme = c.scheme;
  o.degree = c.degree;
  o.b = c.b;
  o.skip_first_levels = c.skip_first_levels;
  o.mode = c.mode;
  return o;
}

}  // namespace

RunOutput run(const RunConfig& config, const RankTrace* replay) {
  RunConfig checked = config;
  if (replay) checked.rank_trace_path = "(in memory)";
  stage("config", [&] { checked.validate(); });
  RankTrace loaded;
  if (config.mode == CompressionMode::LowRankEquivalent && !replay) {
    loaded = stage("rank trace", [&] { return RankTrace::load(config.rank_trace_path); });
    replay = &loaded;
  }
  const ProblemInstance problem = stage("problem", [&] { return build_problem(config.problem); });

  RunOutput out;
  FactorizeOptions opts = options_for(config);
  opts.replay = replay;
  opts.record = &out.trace;
  const auto t0 = std::chrono::steady_clock::now();
  const Preconditioner pre = stage("factorize", [&] { return factorize(problem, opts); });
  const double t_f = seconds_since(t0);

  const std::vector<double> b = random_rhs(problem.size(), config.seed);
  const auto& a = problem.matrix;
  LinearMap amul = [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
  LinearMap minv = [&pre](std::span<const double> x, std::span<double> y) {
    const auto z = pre.apply_inverse(x);
    std::copy(z.begin(), z.end(), y.begin());
  };
  const auto t1 = std::chrono::steady_clock::now();
  PcgResult sol = stage("solve", [&] { return pcg(amul, b, minv, config.tol, config.maxit); });
  const double t_s = seconds_since(t1);

  BenchRecord& r = out.record;
  r.n = problem.size();
  r.problem = config.problem.name;
  r.scheme = to_string(config.scheme);
  r.degree = config.degree;
  r.mode = to_string(config.mode);
  r.it_C = sol.report.iterations;
  r.converged = sol.report.converged;
  r.final_rel_residual = sol.report.final_rel_residual;
  r.t_F = t_f;
  r.t_S = t_s;
  r.peak_blocks_bytes = pre.stats().peak_block_bytes;
  r.flops_factorize = pre.stats().flops_factorize;
  r.flops_apply = pre.flops_apply();
  r.max_node_size = pre.stats().max_node_size;
  r.max_compressed_size = pre.stats().max_compressed_size;
  r.levels = pre.stats().levels;
  r.seed = config.seed;
  out.report = std::move(sol.report);
  out.metadata_json = pre.metadata_json();
  return out;
}

std::string csv_header() {
  return "n,problem,scheme,degree,mode,it_C,converged,final_rel_residual,t_F,t_S,peak_blocks_bytes,"
         "flops_factorize,flops_apply,max_node_size,max_compressed_size,levels,seed,status";
}

namespace {

std::string csv_fields(const BenchRecord& r, bool timed) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << r.n << ',' << r.problem << ',' << r.scheme << ',' << r.degree << ',' << r.mode << ',' << r.it_C << ','
     << (r.converged ? 1 : 0) << ',' << std::scientific << r.final_rel_residual << std::defaultfloat << ',';
  if (timed) {
    os << std::fixed << std::setprecision(4) << r.t_F << ',' << r.t_S << std::defaultfloat << ',';
  } else {
    os << ",,";
  }
  os << r.peak_blocks_bytes << ',' << r.flops_factorize << ',' << r.flops_apply << ',' << r.max_node_size << ','
     << r.max_compressed_size << ',' << r.levels << ',' << r.seed << ',';
  std::string status = r.status;
  std::replace(status.begin(), status.end(), ',', ';');
  std::replace(status.begin(), status.end(), '\n', ' ');
  os << status;
  return os.str();
}

}  // namespace

std::string csv_row(const BenchRecord& r) { return csv_fields(r, true); }
std::string csv_row_untimed(const BenchRecord& r) { return csv_fields(r, false); }

std::string run_json(const RunOutput& out) {
  const auto& r = out.record;
  nlohmann::json j;
  j["record"] = {{"n", r.n},
                 {"problem", r.problem},
                 {"scheme", r.scheme},
                 {"degree", r.degree},
                 {"mode", r.mode},
                 {"it_C", r.it_C},
                 {"converged", r.converged},
                 {"final_rel_residual", r.final_rel_residual},
                 {"t_F", r.t_F},
                 {"t_S", r.t_S},
                 {"peak_blocks_bytes", r.peak_blocks_bytes},
                 {"flops_factorize", r.flops_factorize},
                 {"flops_apply", r.flops_apply},
                 {"max_node_size", r.max_node_size},
                 {"max_compressed_size", r.max_compressed_size},
                 {"levels", r.levels},
                 {"seed", r.seed}};
  j["residual_history"] = out.report.residual_history;
  j["factorization"] = nlohmann::json::parse(out.metadata_json);
  return j.dump(2);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = std::min(x.size(), y.size());
  if (m < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dm = static_cast<double>(m);
  const double den = dm * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (dm * sxy - sx * sy) / den;
}

SweepResult sweep(const RunConfig& base, const std::vector<Index>& ladder) {
  SweepResult s;
  std::vector<double> ns, flops, apply;
  Index first_it = -1;
  for (Index side : ladder) {
    RunConfig c = base;
    c.problem.dims = {side, side, side};
    BenchRecord rec;
    try {
      rec = run(c).record;
    } catch (const std::exception& e) {
      rec.problem = c.problem.name;
      rec.scheme = to_string(c.scheme);
      rec.degree = c.degree;
      rec.mode = to_string(c.mode);
      rec.seed = c.seed;
      rec.status = std::string("failed: ") + e.what();
    }
    if (rec.status == "ok") {
      ns.push_back(static_cast<double>(rec.n));
      flops.push_back(static_cast<double>(std::max<std::uint64_t>(rec.flops_factorize, 1)));
      apply.push_back(static_cast<double>(std::max<std::uint64_t>(rec.flops_apply, 1)));
      if (first_it < 0) first_it = rec.it_C;
      s.it_ratio.push_back(first_it > 0 ? static_cast<double>(rec.it_C) / static_cast<double>(first_it) : 0.0);
    } else {
      s.it_ratio.push_back(0.0);
    }
    s.rows.push_back(std::move(rec));
  }
  s.flops_slope = loglog_slope(ns, flops);
  s.apply_slope = loglog_slope(ns, apply);
  return s;
}

std::string sweep_summary(const SweepResult& s) {
  std::ostringstream os;
  os << "# it_C ratios:";
  for (double r : s.it_ratio) os << ' ' << std::setprecision(4) << r;
  os << "\n# flops_factorize log-log slope: " << std::setprecision(4) << s.flops_slope;
  os << "\n# flops_apply log-log slope: " << std::setprecision(4) << s.apply_slope << '\n';
  return os.str();
}

namespace {

double backward_error(const ProblemInstance& p, const Preconditioner& pre, const std::vector<double>& v, double lambda) {
  const auto av = p.matrix.multiply(v);
  const auto al = pre.apply_operator(v);
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += (av[i] - al[i]) * (av[i] - al[i]);
  return std::sqrt(s) / lambda;
}

}  // namespace

EigStudyReport eig_error_study(const RunConfig& config, Index k) {
  if (config.problem.name != "poisson") throw Error(ErrorCode::ConfigError, "eig-study requires problem = poisson");
  if (k < 1) throw Error(ErrorCode::ConfigError, "eig-study needs k >= 1");
  const ProblemInstance problem = build_problem(config.problem);

  FactorizeOptions opts = options_for(config);
  RankTrace trace;
  Preconditioner poly, lowrank;
  if (config.mode == CompressionMode::Off) {
    opts.mode = CompressionMode::Off;
    poly = factorize(problem, opts);
    lowrank = poly;
  } else {
    opts.mode = CompressionMode::Polynomial;
    opts.record = &trace;
    poly = factorize(problem, opts);
    opts.mode = CompressionMode::LowRankEquivalent;
    opts.record = nullptr;
    opts.replay = &trace;
    lowrank = factorize(problem, opts);
  }

  struct Mode {
    double lambda;
    std::array<Index, 3> k;
  };
  std::vector<Mode> modes;
  const auto& d = problem.grid.dims;
  for (Index z = 1; z <= d[2]; ++z)
    for (Index y = 1; y <= d[1]; ++y)
      for (Index x = 1; x <= d[0]; ++x) modes.push_back({poisson7_eigenvalue(problem, x, y, z), {x, y, z}});
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.lambda < b.lambda; });
  k = std::min<Index>(k, static_cast<Index>(modes.size()));

  auto eval = [&](const Mode& m) {
    EigPairError e;
    e.mode = m.k;
    e.lambda = m.lambda;
    const auto v = poisson7_eigenvector(problem, m.k[0], m.k[1], m.k[2]);
    e.e_polynomial = backward_error(problem, poly, v, m.lambda);
    e.e_lowrank = backward_error(problem, lowrank, v, m.lambda);
    return e;
  };
  EigStudyReport r;
  for (Index i = 0; i < k; ++i) r.smallest.push_back(eval(modes[static_cast<std::size_t>(i)]));
  for (Index i = 0; i < k; ++i) r.largest.push_back(eval(modes[modes.size() - 1 - static_cast<std::size_t>(i)]));
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : (a > 0.0 ? INFINITY : 1.0); };
  r.e1_ratio = ratio(r.largest[0].e_polynomial, r.largest[0].e_lowrank);
  r.en_ratio = ratio(r.smallest[0].e_polynomial, r.smallest[0].e_lowrank);
  return r;
}

std::string eig_study_json(const EigStudyReport& r) {
  auto pairs = [](const std::vector<EigPairError>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : v) {
      a.push_back({{"mode", e.mode}, {"lambda", e.lambda}, {"E_polynomial", e.e_polynomial}, {"E_lowrank", e.e_lowrank}});
    }
    return a;
  };
  nlohmann::json j;
  j["smallest"] = pairs(r.smallest);
  j["largest"] = pairs(r.largest);
  j["E1_ratio"] = r.e1_ratio;
  j["En_ratio"] = r.en_ratio;
  return j.dump(2);
}

}  // namespace sgf
