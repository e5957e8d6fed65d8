#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "sgf/bench.hpp"
#include "sgf/error.hpp"

namespace {

using sgf::Error;
using sgf::ErrorCode;
using sgf::Index;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::GridTooSmall:
      return kExitConfig;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::CountMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotSymmetric:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

// Values from the command line; each is applied only when given, so that a
// --config file supplies the rest.
struct CliValues {
  std::string config_file;
  std::string problem;
  std::vector<Index> dims;
  std::string field;
  double contrast = 0;
  Index layers = 0;
  std::uint64_t field_seed = 0;
  std::vector<Index> tile;
  Index refinement = 0;
  std::string matrix, coords;
  std::string scheme, mode;
  int degree = 0;
  Index b = 0, skip = 0, maxit = 0;
  double tol = 0;
  std::uint64_t seed = 0;
  std::string output, json, rank_trace;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

std::array<Index, 3> to_dims(const std::vector<Index>& v, const char* what) {
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw Error(ErrorCode::ConfigError, std::string(what) + " takes 1 or 3 values");
}

void add_run_options(CLI::App* app, CliValues& v) {
  auto& o = v.opts;
  o["config"] = app->add_option("--config", v.config_file, "JSON file with RunConfig fields; flags override it");
  o["problem"] = app->add_option("--problem", v.problem, "poisson | darcy | elasticity | mtx");
  o["dims"] = app->add_option("--dims", v.dims, "grid size: one value for a cube or three values");
  o["field"] = app->add_option("--field", v.field, "darcy: permeability field file (default: synthetic)");
  o["contrast"] = app->add_option("--contrast", v.contrast, "darcy: synthetic field contrast (default 1e5)");
  o["layers"] = app->add_option("--layers", v.layers, "darcy: number of synthetic z-bands (default 4)");
  o["field-seed"] = app->add_option("--field-seed", v.field_seed, "darcy: synthetic field seed (default 7)");
  o["tile"] = app->add_option("--tile", v.tile, "darcy: tile the field 1 or 3 times per axis");
  o["refinement"] = app->add_option("--refinement", v.refinement, "elasticity: elements per unit length (default 2)");
  o["matrix"] = app->add_option("--matrix", v.matrix, "mtx: Matrix Market file");
  o["coords"] = app->add_option("--coords", v.coords, "mtx: CSV file with x,y,z per row");
  o["scheme"] = app->add_option("--scheme", v.scheme, "nest-all-all | nest-2-all | nest-2-2 | gen-all-all");
  o["degree"] = app->add_option("--degree", v.degree, "polynomial degree 0, 1 or 2");
  o["b"] = app->add_option("--b", v.b, "base block size (default depends on scheme and degree)");
  o["skip-levels"] = app->add_option("--skip-levels", v.skip, "Nest schemes: levels without compression (default 2)");
  o["mode"] = app->add_option("--mode", v.mode, "polynomial | lowrank-equiv | exact");
  o["tol"] = app->add_option("--tol", v.tol, "PCG relative residual tolerance (default 1e-10)");
  o["seed"] = app->add_option("--seed", v.seed, "random right-hand side seed (default 42)");
  o["maxit"] = app->add_option("--maxit", v.maxit, "PCG iteration limit (default 5000)");
  o["output"] = app->add_option("--output,-o", v.output, "CSV output file (default stdout)");
  o["json"] = app->add_option("--json", v.json, "JSON detail output file");
  o["rank-trace"] =
      app->add_option("--rank-trace", v.rank_trace, "rank trace: written by polynomial runs, read by lowrank-equiv");
}

void apply_json(const nlohmann::json& j, sgf::RunConfig& c) {
  auto& p = c.problem;
  auto dims3 = [](const nlohmann::json& d) {
    return d.is_array() ? to_dims(d.get<std::vector<Index>>(), "dims") : to_dims({d.get<Index>()}, "dims");
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& val = it.value();
    if (k == "problem") p.name = val.get<std::string>();
    else if (k == "dims") p.dims = dims3(val);
    else if (k == "field") p.field_path = val.get<std::string>();
    else if (k == "contrast") p.contrast = val.get<double>();
    else if (k == "layers") p.layers = val.get<Index>();
    else if (k == "field_seed") p.field_seed = val.get<std::uint64_t>();
    else if (k == "tile") p.tile = dims3(val);
    else if (k == "refinement") p.refinement = val.get<Index>();
    else if (k == "matrix") p.matrix_path = val.get<std::string>();
    else if (k == "coords") p.coords_path = val.get<std::string>();
    else if (k == "scheme") c.scheme = sgf::parse_scheme(val.get<std::string>());
    else if (k == "degree") c.degree = val.get<int>();
    else if (k == "b") c.b = val.get<Index>();
    else if (k == "skip_first_levels") c.skip_first_levels = val.get<Index>();
    else if (k == "mode") c.mode = sgf::parse_mode(val.get<std::string>());
    else if (k == "tol") c.tol = val.get<double>();
    else if (k == "seed") c.seed = val.get<std::uint64_t>();
    else if (k == "maxit") c.maxit = val.get<Index>();
    else if (k == "output") c.output = val.get<std::string>();
    else if (k == "json") c.json_path = val.get<std::string>();
    else if (k == "rank_trace") c.rank_trace_path = val.get<std::string>();
    else throw Error(ErrorCode::ConfigError, "unknown config key '" + k + "'");
  }
}

sgf::RunConfig make_config(const CliValues& v) {
  sgf::RunConfig c;
  if (!v.config_file.empty()) {
    std::ifstream in(v.config_file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + v.config_file);
    try {
      apply_json(nlohmann::json::parse(in), c);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, "config file " + v.config_file + ": " + e.what());
    }
  }
  auto& p = c.problem;
  if (v.given("problem")) p.name = v.problem;
  if (v.given("dims")) p.dims = to_dims(v.dims, "--dims");
  if (v.given("field")) p.field_path = v.field;
  if (v.given("contrast")) p.contrast = v.contrast;
  if (v.given("layers")) p.layers = v.layers;
  if (v.given("field-seed")) p.field_seed = v.field_seed;
  if (v.given("tile")) p.tile = to_dims(v.tile, "--tile");
  if (v.given("refinement")) p.refinement = v.refinement;
  if (v.given("matrix")) p.matrix_path = v.matrix;
  if (v.given("coords")) p.coords_path = v.coords;
  if (v.given("scheme")) c.scheme = sgf::parse_scheme(v.scheme);
  if (v.given("degree")) c.degree = v.degree;
  if (v.given("b")) c.b = v.b;
  if (v.given("skip-levels")) c.skip_first_levels = v.skip;
  if (v.given("mode")) c.mode = sgf::parse_mode(v.mode);
  if (v.given("tol")) c.tol = v.tol;
  if (v.given("seed")) c.seed = v.seed;
  if (v.given("maxit")) c.maxit = v.maxit;
  if (v.given("output")) c.output = v.output;
  if (v.given("json")) c.json_path = v.json;
  if (v.given("rank-trace")) c.rank_trace_path = v.rank_trace;
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

void emit_table(const std::string& path, const std::string& table) {
  if (path.empty()) {
    std::cout << table;
  } else {
    write_text(path, table);
  }
}

int cmd_run(const sgf::RunConfig& c) {
  const sgf::RunOutput out = sgf::run(c);
  emit_table(c.output, sgf::csv_header() + "\n" + sgf::csv_row(out.record) + "\n");
  if (!c.json_path.empty()) write_text(c.json_path, sgf::run_json(out));
  if (c.mode == sgf::CompressionMode::Polynomial && !c.rank_trace_path.empty()) out.trace.save(c.rank_trace_path);
  return out.record.converged ? 0 : kExitNumerical;
}

int cmd_sweep(sgf::RunConfig c, const std::vector<Index>& ladder, bool compare) {
  if (compare) {
    c.mode = sgf::CompressionMode::Polynomial;
    c.rank_trace_path.clear();
  }
  c.validate();
  std::string table = sgf::csv_header() + "\n";
  sgf::SweepResult s;
  if (!compare) {
    s = sgf::sweep(c, ladder);
  } else {
    // Each polynomial row is followed by its low-rank-equivalent replay.
    for (Index side : ladder) {
      sgf::RunConfig pc = c;
      pc.problem.dims = {side, side, side};
      sgf::RunConfig lc = pc;
      lc.mode = sgf::CompressionMode::LowRankEquivalent;
      try {
        const sgf::RunOutput po = sgf::run(pc);
        s.rows.push_back(po.record);
        try {
          s.rows.push_back(sgf::run(lc, &po.trace).record);
        } catch (const std::exception& e) {
          sgf::BenchRecord r = po.record;
          r.mode = sgf::to_string(lc.mode);
          r.status = std::string("failed: ") + e.what();
          s.rows.push_back(r);
        }
      } catch (const std::exception& e) {
        sgf::BenchRecord r;
        r.problem = pc.problem.name;
        r.scheme = sgf::to_string(pc.scheme);
        r.degree = pc.degree;
        r.mode = sgf::to_string(pc.mode);
        r.seed = pc.seed;
        r.status = std::string("failed: ") + e.what();
        s.rows.push_back(r);
      }
    }
  }
  for (const auto& r : s.rows) table += sgf::csv_row(r) + "\n";
  emit_table(c.output, table);
  if (!compare && !ladder.empty()) std::cerr << sgf::sweep_summary(s);
  if (!c.json_path.empty()) {
    nlohmann::json j;
    j["it_ratio"] = s.it_ratio;
    j["flops_slope"] = s.flops_slope;
    j["apply_slope"] = s.apply_slope;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : s.rows) {
      j["rows"].push_back({{"n", r.n}, {"mode", r.mode}, {"it_C", r.it_C}, {"status", r.status}});
    }
    write_text(c.json_path, j.dump(2));
  }
  return 0;
}

int cmd_eig(const sgf::RunConfig& c, Index k) {
  const sgf::EigStudyReport r = sgf::eig_error_study(c, k);
  const std::string text = sgf::eig_study_json(r) + "\n";
  if (!c.json_path.empty()) write_text(c.json_path, text);
  emit_table(c.output, text);
  return 0;
}

int cmd_gen(const sgf::RunConfig& c, const std::string& prefix, const std::string& field_out) {
  c.validate();
  const sgf::ProblemInstance p = sgf::build_problem(c.problem);
  sgf::write_mtx(prefix + ".mtx", p.matrix);
  sgf::write_coords_csv(prefix + ".coords.csv", p.coords);
  if (!field_out.empty()) {
    if (c.problem.name != "darcy") throw Error(ErrorCode::ConfigError, "--write-field needs --problem darcy");
    sgf::ScalarField f = c.problem.field_path.empty()
                             ? sgf::synth_perm_field(c.problem.dims, c.problem.layers, c.problem.contrast,
                                                     c.problem.field_seed)
                             : sgf::read_perm_field(c.problem.field_path);
    if (c.problem.tile != std::array<Index, 3>{1, 1, 1}) f = sgf::tile_field(f, c.problem.tile);
    sgf::write_perm_field(field_out, f);
  }
  std::cerr << "wrote " << prefix << ".mtx and " << prefix << ".coords.csv (n = " << p.size() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse geometric factorization preconditioners: factorize, solve with PCG, benchmark."};
  app.footer(
      "Memory column peak_blocks_bytes is the peak total size of live dense blocks in the trailing\n"
      "block matrix. It tracks, but is not equal to, the process resident set size.\n"
      "Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.");
  app.require_subcommand(1);

  CliValues run_v, sweep_v, eig_v, gen_v;
  auto* run_cmd = app.add_subcommand("run", "factorize and solve one problem, print one CSV row");
  add_run_options(run_cmd, run_v);

  auto* sweep_cmd = app.add_subcommand("sweep", "run a ladder of cube sizes, print a CSV table");
  add_run_options(sweep_cmd, sweep_v);
  std::vector<Index> ladder;
  bool compare = false;
  sweep_cmd->add_option("--ladder", ladder, "cube sides, e.g. --ladder 12 16 24 32");
  sweep_cmd->add_flag("--compare", compare, "follow each polynomial run by its low-rank-equivalent replay");

  auto* eig_cmd = app.add_subcommand("eig-study", "backward errors on analytic Poisson eigenpairs");
  add_run_options(eig_cmd, eig_v);
  Index k = 1;
  eig_cmd->add_option("--k", k, "eigenpairs taken from each end of the spectrum (default 1)");

  auto* gen_cmd = app.add_subcommand("gen-problem", "write the problem as Matrix Market plus coordinates CSV");
  add_run_options(gen_cmd, gen_v);
  std::string prefix = "problem";
  std::string field_out;
  gen_cmd->add_option("--prefix", prefix, "output prefix: <prefix>.mtx and <prefix>.coords.csv");
  gen_cmd->add_option("--write-field", field_out, "darcy: also write the permeability field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const char* stage = "config";
  try {
    if (run_cmd->parsed()) {
      const auto c = make_config(run_v);
      stage = "run";
      return cmd_run(c);
    }
    if (sweep_cmd->parsed()) {
      const auto c = make_config(sweep_v);
      stage = "sweep";
      return cmd_sweep(c, ladder, compare);
    }
    if (eig_cmd->parsed()) {
      const auto c = make_config(eig_v);
      stage = "eig-study";
      return cmd_eig(c, k);
    }
    if (gen_cmd->parsed()) {
      const auto c = make_config(gen_v);
      stage = "gen-problem";
      return cmd_gen(c, prefix, field_out);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << stage << "] " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "] " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
