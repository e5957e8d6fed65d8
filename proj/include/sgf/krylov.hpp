#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sgf/dense.hpp"

namespace sgf {

/// y = op(x); y has the same length as x.
using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct SolveReport {
  Index iterations = 0;
  std::vector<double> residual_history;  ///< relative 2-norms, iterations + 1 entries
  bool converged = false;
  double wall_time = 0.0;
  double final_rel_residual = 0.0;  ///< recomputed as ||b - A x|| / ||b||
};

struct PcgResult {
  std::vector<double> x;
  SolveReport report;
};

inline constexpr Index kDefaultMaxIt = 5000;
inline constexpr Index kTrueResidualEvery = 50;

/// Preconditioned conjugate gradients from x0 = 0. An empty `precond` means
/// no preconditioning. Throws IndefiniteDetected when p^T A p <= 0 or
/// r^T z <= 0.
PcgResult pcg(const LinearMap& a, std::span<const double> b, const LinearMap& precond, double tol,
              Index maxit = kDefaultMaxIt);

struct EigEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  Index steps = 0;
};

/// Ritz extremes after `iters` Lanczos steps with full reorthogonalization,
/// from a fixed pseudo-random start vector.
EigEstimate estimate_extreme_eigs(const LinearMap& op, Index dim, Index iters, std::uint64_t seed = 12345);

}  // namespace sgf
