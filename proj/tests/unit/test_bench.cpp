#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sgf/bench.hpp"
#include "sgf/error.hpp"

using namespace sgf;

namespace {

RunConfig poisson(Index side, Scheme s = Scheme::Nest22, int degree = 1) {
  RunConfig c;
  c.problem.dims = {side, side, side};
  c.scheme = s;
  c.degree = degree;
  return c;
}

ErrorCode validate_code(const RunConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected ConfigError");
  return ErrorCode::InvalidArgument;
}

std::size_t columns(const std::string& row) { return static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1; }

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(poisson(8).validate());
  RunConfig c = poisson(8);
  c.degree = 3;
  CHECK(validate_code(c) == ErrorCode::ConfigError);
  c = poisson(8);
  c.b = 1;
  CHECK(validate_code(c) == ErrorCode::ConfigError);
  c = poisson(8);
  c.tol = 0.0;
  CHECK(validate_code(c) == ErrorCode::ConfigError);
  c.tol = 1.0;
  CHECK(validate_code(c) == ErrorCode::ConfigError);
  c = poisson(8);
  c.mode = CompressionMode::LowRankEquivalent;
  CHECK(validate_code(c) == ErrorCode::ConfigError);
  c.rank_trace_path = "trace.json";
  CHECK_NOTHROW(c.validate());
  c = poisson(8);
  c.problem.name = "heat";
  CHECK(validate_code(c) == ErrorCode::ConfigError);
}

TEST_CASE("exact mode run converges immediately") {
  RunConfig c = poisson(11);
  c.mode = CompressionMode::Off;
  const RunOutput out = run(c);
  CHECK(out.record.converged);
  CHECK(out.record.it_C <= 2);
  CHECK(out.record.mode == "exact");
}

TEST_CASE("nest-2-2 degree 2 run on 16^3") {
  const RunOutput out = run(poisson(16, Scheme::Nest22, 2));
  const BenchRecord& r = out.record;
  CHECK(r.converged);
  CHECK(r.it_C <= 40);
  CHECK(r.n == 4096);
  CHECK(r.final_rel_residual <= 1e-10);
  CHECK(r.t_F >= 0.0);
  CHECK(r.t_S >= 0.0);
  CHECK(r.flops_factorize > 0);
  CHECK(r.flops_apply > 0);
  CHECK(r.peak_blocks_bytes > 0);
  CHECK(r.max_node_size > 0);
  CHECK(r.levels >= 2);
  CHECK(!out.trace.entries.empty());
  CHECK(out.report.residual_history.size() == static_cast<std::size_t>(r.it_C) + 1);

  const nlohmann::json j = nlohmann::json::parse(run_json(out));
  CHECK(j["record"]["it_C"] == r.it_C);
  CHECK(j["residual_history"].size() == out.report.residual_history.size());
  CHECK(j["factorization"]["per_level"].size() > 0);
}

TEST_CASE("lowrank-equiv replays a recorded trace from file or memory") {
  RunConfig c = poisson(12, Scheme::GenAllAll, 0);
  const RunOutput poly = run(c);
  poly.trace.save("bench_trace.json");
  RunConfig lc = c;
  lc.mode = CompressionMode::LowRankEquivalent;
  CHECK_THROWS_AS(run(lc), Error);
  lc.rank_trace_path = "bench_trace.json";
  const RunOutput from_file = run(lc);
  const RunOutput in_memory = run(lc, &poly.trace);
  CHECK(csv_row_untimed(from_file.record) == csv_row_untimed(in_memory.record));
  CHECK(from_file.record.mode == "lowrank-equiv");
}

TEST_CASE("errors name the failing stage") {
  RunConfig c = poisson(8);
  c.problem.name = "darcy";
  c.problem.field_path = "no_such_field.txt";
  try {
    (void)run(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find("problem") != std::string::npos);
  }
}

TEST_CASE("CSV layout") {
  const std::string header = csv_header();
  const RunOutput out = run(poisson(8, Scheme::NestAllAll, 0));
  CHECK(columns(csv_row(out.record)) == columns(header));
  CHECK(columns(csv_row_untimed(out.record)) == columns(header));
  CHECK(header.rfind("n,problem,scheme,degree,mode,it_C", 0) == 0);
}

TEST_CASE("runs are deterministic apart from timings") {
  const RunConfig c = poisson(12, Scheme::Nest2All, 2);
  const RunOutput a = run(c);
  const RunOutput b = run(c);
  CHECK(csv_row_untimed(a.record) == csv_row_untimed(b.record));
  CHECK(a.report.residual_history == b.report.residual_history);
  CHECK(a.trace.entries == b.trace.entries);
  RunConfig other = c;
  other.seed = 43;
  CHECK(run(other).report.residual_history != a.report.residual_history);
}

TEST_CASE("sweep rows equal individual runs") {
  const RunConfig base = poisson(0, Scheme::Nest22, 2);
  const SweepResult s = sweep(base, {12, 16});
  REQUIRE(s.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    RunConfig c = base;
    const Index side = i == 0 ? 12 : 16;
    c.problem.dims = {side, side, side};
    CHECK(csv_row_untimed(s.rows[i]) == csv_row_untimed(run(c).record));
  }
  CHECK(s.it_ratio[0] == 1.0);
  CHECK(s.flops_slope > 0.0);
  CHECK(sweep_summary(s).find("slope") != std::string::npos);

  CHECK(sweep(base, {}).rows.empty());
}

TEST_CASE("nest-2-2 iteration ratio over 12^3 to 24^3") {
  const SweepResult s = sweep(poisson(0, Scheme::Nest22, 2), {12, 24});
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[1].status == "ok");
  CHECK(s.it_ratio[1] <= 1.5);
}

TEST_CASE("sweep keeps going after a failing row") {
  RunConfig base = poisson(0);
  base.b = 3;
  const SweepResult s = sweep(base, {2, 8});
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].status.rfind("failed", 0) == 0);
  CHECK(s.rows[1].status == "ok");
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
  CHECK(loglog_slope({5}, {7}) == 0.0);
}

TEST_CASE("eigenvector study") {
  RunConfig c = poisson(11, Scheme::NestAllAll, 2);
  c.mode = CompressionMode::Off;
  const EigStudyReport exact = eig_error_study(c, 2);
  REQUIRE(exact.smallest.size() == 2);
  for (const auto& e : exact.smallest) {
    CHECK(e.e_polynomial <= 1e-10);
    CHECK(e.e_lowrank <= 1e-10);
  }
  for (const auto& e : exact.largest) CHECK(e.e_polynomial <= 1e-10);
  CHECK(exact.smallest[0].lambda < exact.smallest[1].lambda);
  CHECK(exact.largest[0].lambda > exact.largest[1].lambda);

  c.mode = CompressionMode::Polynomial;
  const EigStudyReport r = eig_error_study(c, 1);
  CHECK(r.smallest[0].mode == std::array<Index, 3>{1, 1, 1});
  CHECK(r.largest[0].mode == std::array<Index, 3>{11, 11, 11});
  CHECK(r.en_ratio == doctest::Approx(r.smallest[0].e_polynomial / r.smallest[0].e_lowrank));
  CHECK(nlohmann::json::parse(eig_study_json(r)).contains("En_ratio"));

  RunConfig d = c;
  d.problem.name = "darcy";
  CHECK_THROWS_AS(eig_error_study(d, 1), Error);
}

TEST_CASE("problem builders dispatch by name") {
  ProblemSpec s;
  s.name = "elasticity";
  s.refinement = 1;
  CHECK(build_problem(s).components() == 3);
  s.name = "darcy";
  s.dims = {4, 5, 6};
  CHECK(build_problem(s).size() == 120);
  s.tile = {2, 1, 1};
  CHECK(build_problem(s).size() == 240);
  CHECK(random_rhs(5, 1) == random_rhs(5, 1));
  CHECK(random_rhs(5, 1) != random_rhs(5, 2));
}
