#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sgf/factorization.hpp"
#include "sgf/krylov.hpp"
#include "sgf/problems.hpp"

namespace sgf {

struct ProblemSpec {
  std::string name = "poisson";  ///< poisson | darcy | elasticity | mtx
  std::array<Index, 3> dims{16, 16, 16};
  // darcy
  std::string field_path;  ///< empty: synthetic field
  double contrast = 1e5;
  Index layers = 4;
  std::uint64_t field_seed = 7;
  std::array<Index, 3> tile{1, 1, 1};
  // elasticity
  Index refinement = 2;
  Lame lame_left{1.0, 1.0};
  Lame lame_right{50.0, 50.0};
  // mtx
  std::string matrix_path;
  std::string coords_path;
};

struct RunConfig {
  ProblemSpec problem;
  Scheme scheme = Scheme::Nest22;
  int degree = 1;
  Index b = 0;
  Index skip_first_levels = 2;
  CompressionMode mode = CompressionMode::Polynomial;
  double tol = 1e-10;
  std::uint64_t seed = 42;
  Index maxit = kDefaultMaxIt;
  std::string output;           ///< CSV file; empty: stdout
  std::string json_path;        ///< optional JSON detail
  std::string rank_trace_path;  ///< written in polynomial mode, read in lowrank-equiv mode

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct BenchRecord {
  Index n = 0;
  std::string problem;
  std::string scheme;
  int degree = 0;
  std::string mode;
  Index it_C = 0;
  bool converged = false;
  double final_rel_residual = 0.0;
  double t_F = 0.0;
  double t_S = 0.0;
  std::size_t peak_blocks_bytes = 0;
  std::uint64_t flops_factorize = 0;
  std::uint64_t flops_apply = 0;
  Index max_node_size = 0;
  Index max_compressed_size = 0;
  Index levels = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

struct RunOutput {
  BenchRecord record;
  SolveReport report;
  RankTrace trace;  ///< recorded in polynomial mode
  std::string metadata_json;
};

ProblemInstance build_problem(const ProblemSpec& spec);

/// Uniform values in [-1, 1] from mt19937_64(seed).
std::vector<double> random_rhs(Index n, std::uint64_t seed);

/// Problem, factorization, PCG solve. In lowrank-equiv mode the ranks come
/// from `replay` or, when null, from config.rank_trace_path.
RunOutput run(const RunConfig& config, const RankTrace* replay = nullptr);

std::string csv_header();
std::string csv_row(const BenchRecord& r);
/// CSV row without the timing columns, for determinism comparisons.
std::string csv_row_untimed(const BenchRecord& r);
std::string run_json(const RunOutput& out);

struct SweepResult {
  std::vector<BenchRecord> rows;
  std::vector<double> it_ratio;  ///< it_C / it_C of the first successful row
  double flops_slope = 0.0;      ///< least-squares slope of log flops_factorize vs log n
  double apply_slope = 0.0;
};

/// Runs `base` once per cube side in `ladder`. A failing row is kept with its
/// status set and the sweep continues.
SweepResult sweep(const RunConfig& base, const std::vector<Index>& ladder);
std::string sweep_summary(const SweepResult& s);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct EigPairError {
  std::array<Index, 3> mode{};
  double lambda = 0.0;
  double e_polynomial = 0.0;
  double e_lowrank = 0.0;
};

struct EigStudyReport {
  std::vector<EigPairError> smallest;  ///< ascending eigenvalue; smallest[0] is lambda_n
  std::vector<EigPairError> largest;   ///< descending eigenvalue; largest[0] is lambda_1
  double e1_ratio = 0.0;  ///< E_1(polynomial) / E_1(lowrank), largest eigenvalue
  double en_ratio = 0.0;  ///< E_n(polynomial) / E_n(lowrank), smallest eigenvalue
};

/// Backward errors (1/lambda) ||(A - A_l) v|| on the k smallest and k largest
/// analytic Poisson eigenpairs, for the polynomial operator and for the
/// low-rank-equivalent operator built with the same ranks. With mode exact
/// both columns use the uncompressed factorization.
EigStudyReport eig_error_study(const RunConfig& config, Index k);
std::string eig_study_json(const EigStudyReport& r);

}  // namespace sgf
