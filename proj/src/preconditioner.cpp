#include "sgf/preconditioner.hpp"

#include <json.hpp>

#include "sgf/error.hpp"

namespace sgf {

namespace {

std::vector<double> gather(const std::vector<double>& w, const std::vector<Index>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = w[static_cast<std::size_t>(idx[k])];
  return out;
}

void scatter(std::vector<double>& w, const std::vector<Index>& idx, const std::vector<double>& v) {
  for (std::size_t k = 0; k < idx.size(); ++k) w[static_cast<std::size_t>(idx[k])] = v[k];
}

// y -= A x
void gemv_sub(const DenseMatrix& a, const std::vector<double>& x, std::vector<double>& y) {
  for (Index i = 0; i < a.rows(); ++i) {
    const double* r = a.data() + i * a.cols();
    double s = 0.0;
    for (Index j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] -= s;
  }
}

// y += alpha A^T x
void gemv_t_add(const DenseMatrix& a, const std::vector<double>& x, std::vector<double>& y, double alpha) {
  for (Index i = 0; i < a.rows(); ++i) {
    const double* r = a.data() + i * a.cols();
    const double xi = alpha * x[i];
    if (xi == 0.0) continue;
    for (Index j = 0; j < a.cols(); ++j) y[j] += r[j] * xi;
  }
}

std::vector<double> mul(const DenseMatrix& a, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(a.rows()), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const double* r = a.data() + i * a.cols();
    double s = 0.0;
    for (Index j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> mul_t(const DenseMatrix& a, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(a.cols()), 0.0);
  gemv_t_add(a, x, y, 1.0);
  return y;
}

// w <- F^{-1} w
struct InverseOp {
  std::vector<double>& w;
  void operator()(const EliminationFactor& f) const {
    auto xb = gather(w, f.slots);
    lower_solve_inplace(f.L.L, xb);
    scatter(w, f.slots, xb);
    if (f.neighbor_slots.empty()) return;
    auto xn = gather(w, f.neighbor_slots);
    gemv_sub(f.E, xb, xn);
    scatter(w, f.neighbor_slots, xn);
  }
  void operator()(const CompressionFactor& f) const {
    auto xs = gather(w, f.slots);
    lower_solve_inplace(f.L.L, xs);
    scatter(w, f.slots, mul_t(f.Q, xs));
  }
  void operator()(const FinalDenseFactor& f) const {
    auto x = gather(w, f.perm);
    lower_solve_inplace(f.L.L, x);
    scatter(w, f.perm, x);
  }
};

// w <- F^{-T} w
struct InverseTransposeOp {
  std::vector<double>& w;
  void operator()(const EliminationFactor& f) const {
    auto xb = gather(w, f.slots);
    if (!f.neighbor_slots.empty()) {
      auto xn = gather(w, f.neighbor_slots);
      gemv_t_add(f.E, xn, xb, -1.0);
    }
    lower_transpose_solve_inplace(f.L.L, xb);
    scatter(w, f.slots, xb);
  }
  void operator()(const CompressionFactor& f) const {
    auto y = mul(f.Q, gather(w, f.slots));
    lower_transpose_solve_inplace(f.L.L, y);
    scatter(w, f.slots, y);
  }
  void operator()(const FinalDenseFactor& f) const {
    auto x = gather(w, f.perm);
    lower_transpose_solve_inplace(f.L.L, x);
    scatter(w, f.perm, x);
  }
};

// w <- F^T w
struct TransposeOp {
  std::vector<double>& w;
  void operator()(const EliminationFactor& f) const {
    auto xb = gather(w, f.slots);
    lower_transpose_multiply_inplace(f.L.L, xb);
    if (!f.neighbor_slots.empty()) gemv_t_add(f.E, gather(w, f.neighbor_slots), xb, 1.0);
    scatter(w, f.slots, xb);
  }
  void operator()(const CompressionFactor& f) const {
    auto xs = gather(w, f.slots);
    lower_transpose_multiply_inplace(f.L.L, xs);
    scatter(w, f.slots, mul_t(f.Q, xs));
  }
  void operator()(const FinalDenseFactor& f) const {
    auto x = gather(w, f.perm);
    lower_transpose_multiply_inplace(f.L.L, x);
    scatter(w, f.perm, x);
  }
};

// w <- F w
struct ForwardOp {
  std::vector<double>& w;
  void operator()(const EliminationFactor& f) const {
    auto xb = gather(w, f.slots);
    if (!f.neighbor_slots.empty()) {
      auto xn = gather(w, f.neighbor_slots);
      auto ex = mul(f.E, xb);
      for (std::size_t k = 0; k < xn.size(); ++k) xn[k] += ex[k];
      scatter(w, f.neighbor_slots, xn);
    }
    lower_multiply_inplace(f.L.L, xb);
    scatter(w, f.slots, xb);
  }
  void operator()(const CompressionFactor& f) const {
    auto y = mul(f.Q, gather(w, f.slots));
    lower_multiply_inplace(f.L.L, y);
    scatter(w, f.slots, y);
  }
  void operator()(const FinalDenseFactor& f) const {
    auto x = gather(w, f.perm);
    lower_multiply_inplace(f.L.L, x);
    scatter(w, f.perm, x);
  }
};

std::uint64_t sq(Index m) { return static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(m); }

}  // namespace

Preconditioner::Preconditioner(Index n, std::vector<ElementaryFactor> factors, FactorStats stats)
    : n_(n), factors_(std::move(factors)), stats_(std::move(stats)) {
  for (const auto& f : factors_) {
    if (const auto* e = std::get_if<EliminationFactor>(&f)) {
      const Index m = static_cast<Index>(e->slots.size());
      flops_apply_ += 2 * sq(m) + 4 * static_cast<std::uint64_t>(e->neighbor_slots.size()) * static_cast<std::uint64_t>(m);
    } else if (const auto* c = std::get_if<CompressionFactor>(&f)) {
      flops_apply_ += 6 * sq(static_cast<Index>(c->slots.size()));
    } else {
      flops_apply_ += 2 * sq(static_cast<Index>(std::get<FinalDenseFactor>(f).perm.size()));
    }
  }
}

void Preconditioner::check_length(std::size_t len) const {
  if (static_cast<Index>(len) != n_) {
    throw Error(ErrorCode::ShapeMismatch,
                "vector length " + std::to_string(len) + " differs from preconditioner size " + std::to_string(n_));
  }
}

void Preconditioner::forward_inverse(std::vector<double>& w) const {
  InverseOp op{w};
  for (const auto& f : factors_) std::visit(op, f);
}

void Preconditioner::backward_inverse_transpose(std::vector<double>& w) const {
  InverseTransposeOp op{w};
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) std::visit(op, *it);
}

std::vector<double> Preconditioner::apply_inverse(std::span<const double> x) const {
  check_length(x.size());
  std::vector<double> w(x.begin(), x.end());
  forward_inverse(w);
  backward_inverse_transpose(w);
  return w;
}

std::vector<double> Preconditioner::apply_half_inverse(std::span<const double> x) const {
  check_length(x.size());
  std::vector<double> w(x.begin(), x.end());
  forward_inverse(w);
  return w;
}

std::vector<double> Preconditioner::apply_half_inverse_transpose(std::span<const double> x) const {
  check_length(x.size());
  std::vector<double> w(x.begin(), x.end());
  backward_inverse_transpose(w);
  return w;
}

std::vector<double> Preconditioner::apply_operator(std::span<const double> x) const {
  check_length(x.size());
  std::vector<double> w(x.begin(), x.end());
  TransposeOp t{w};
  for (const auto& f : factors_) std::visit(t, f);
  ForwardOp fw{w};
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) std::visit(fw, *it);
  return w;
}

std::size_t Preconditioner::factor_bytes() const noexcept {
  std::size_t total = 0;
  for (const auto& f : factors_) {
    if (const auto* e = std::get_if<EliminationFactor>(&f)) {
      total += e->L.L.bytes() + e->E.bytes();
    } else if (const auto* c = std::get_if<CompressionFactor>(&f)) {
      total += c->L.L.bytes() + c->Q.bytes();
    } else {
      total += std::get<FinalDenseFactor>(f).L.L.bytes();
    }
  }
  return total;
}

std::string Preconditioner::metadata_json() const {
  nlohmann::json j;
  j["n"] = n_;
  j["levels"] = stats_.levels;
  j["flops_factorize"] = stats_.flops_factorize;
  j["flops_apply"] = flops_apply_;
  j["peak_block_bytes"] = stats_.peak_block_bytes;
  j["factor_bytes"] = factor_bytes();
  j["max_node_size"] = stats_.max_node_size;
  j["max_compressed_size"] = stats_.max_compressed_size;
  j["final_dense_size"] = stats_.final_dense_size;
  j["per_level"] = nlohmann::json::array();
  for (const auto& l : stats_.per_level) {
    j["per_level"].push_back({{"level", l.level},
                              {"nodes", l.nodes},
                              {"active_unknowns", l.active_unknowns},
                              {"max_node_size", l.max_node_size},
                              {"eliminated", l.eliminated},
                              {"compressed", l.compressed},
                              {"max_after_compression", l.max_after_compression},
                              {"ranks", l.ranks}});
  }
  return j.dump(2);
}

}  // namespace sgf
