#include "sgf/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "sgf/error.hpp"
#include "sgf/sparse.hpp"

namespace sgf {

namespace {

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

PcgResult pcg(const LinearMap& a, std::span<const double> b, const LinearMap& precond, double tol, Index maxit) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = b.size();
  PcgResult res;
  res.x.assign(n, 0.0);
  SolveReport& rep = res.report;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    rep.residual_history = {0.0};
    rep.converged = true;
    return res;
  }

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), ap(n);
  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (precond) {
      precond(in, out);
    } else {
      out = in;
    }
  };
  auto true_residual = [&]() {
    a(res.x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    return norm2(r) / bnorm;
  };

  apply_precond(r, z);
  double rz = dot(r, z);
  if (!(rz > 0.0)) throw Error(ErrorCode::IndefiniteDetected, "r^T z = " + std::to_string(rz) + " at iteration 0");
  p = z;
  rep.residual_history.push_back(1.0);
  double rel = 1.0;
  Index k = 0;
  while (k < maxit) {
    a(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw Error(ErrorCode::IndefiniteDetected, "p^T A p = " + std::to_string(pap) + " at iteration " + std::to_string(k));
    }
    const double alpha = rz / pap;
    axpy(alpha, p, res.x);
    axpy(-alpha, ap, r);
    ++k;
    rel = norm2(r) / bnorm;
    bool checked = false;
    if (k % kTrueResidualEvery == 0 || rel <= tol) {
      rel = true_residual();
      checked = true;
    }
    rep.residual_history.push_back(rel);
    if (checked && rel <= tol) {
      rep.converged = true;
      break;
    }
    apply_precond(r, z);
    const double rz_new = dot(r, z);
    if (!(rz_new > 0.0)) {
      throw Error(ErrorCode::IndefiniteDetected, "r^T z = " + std::to_string(rz_new) + " at iteration " + std::to_string(k));
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  rep.iterations = k;
  rep.final_rel_residual = true_residual();
  rep.converged = rep.final_rel_residual <= tol;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

EigEstimate estimate_extreme_eigs(const LinearMap& op, Index dim, Index iters, std::uint64_t seed) {
  if (dim < 1 || iters < 1) throw Error(ErrorCode::InvalidArgument, "Lanczos needs dim >= 1 and iters >= 1");
  const Index steps_max = std::min(dim, iters);
  const std::size_t n = static_cast<std::size_t>(dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> v;
  v.reserve(static_cast<std::size_t>(steps_max));
  std::vector<double> q(n);
  for (double& x : q) x = unif(rng);
  double nq = norm2(q);
  for (double& x : q) x /= nq;

  std::vector<double> alpha, beta;
  std::vector<double> w(n);
  for (Index j = 0; j < steps_max; ++j) {
    v.push_back(q);
    op(v.back(), w);
    const double aj = dot(v.back(), w);
    if (!(aj > 0.0)) {
      throw Error(ErrorCode::IndefiniteDetected, "Rayleigh quotient " + std::to_string(aj) + " at Lanczos step " + std::to_string(j));
    }
    alpha.push_back(aj);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& vi : v) {
        const double c = dot(vi, w);
        axpy(-c, vi, w);
      }
    }
    const double bj = norm2(w);
    if (j + 1 == steps_max || bj <= 1e-13 * std::abs(aj)) break;
    beta.push_back(bj);
    for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / bj;
  }
  const Index m = static_cast<Index>(alpha.size());
  Eigen::VectorXd d(m), e(std::max<Index>(m - 1, 0));
  for (Index i = 0; i < m; ++i) d(i) = alpha[i];
  for (Index i = 0; i + 1 < m; ++i) e(i) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  EigEstimate out;
  out.lambda_min = es.eigenvalues()(0);
  out.lambda_max = es.eigenvalues()(m - 1);
  out.steps = m;
  if (!(out.lambda_min > 0.0)) throw Error(ErrorCode::IndefiniteDetected, "non-positive Ritz value");
  return out;
}

}  // namespace sgf
