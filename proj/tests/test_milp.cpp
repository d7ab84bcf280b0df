#include <cmath>
#include <sstream>

#include "doctest.h"
#include "opbsp/error.hpp"
#include "opbsp/lp_io.hpp"
#include "opbsp/milp.hpp"
#include "support.hpp"

using namespace opbsp;

namespace {

// Best NPV over every assignment block -> {1..T, never} that respects the
// arcs and the capacities, enumerated directly rather than through y.
double schedule_enumeration(const OpbspInstance& inst) {
  const int n = inst.num_blocks();
  const int T = inst.horizon;
  const auto cols = inst.capacities.resolve(inst.resource_names);
  std::vector<int> tau(n, 0);
  double best = -kInf;
  std::function<void(int)> rec = [&](int i) {
    if (i < n) {
      for (int t = 1; t <= T + 1; ++t) {
        tau[i] = t;
        rec(i + 1);
      }
      return;
    }
    for (const auto& [s, p] : inst.arcs) {
      if (tau[s] <= T && tau[p] > tau[s]) return;
    }
    for (std::size_t l = 0; l < inst.capacities.limits.size(); ++l) {
      for (int t = 1; t <= T; ++t) {
        double use = 0.0;
        for (int b = 0; b < n; ++b) {
          if (tau[b] == t) use += inst.use(b, cols[l]);
        }
        const auto& lim = inst.capacities.limits[l];
        if (use > lim.upper_at(t) + 1e-9 || use < lim.lower_at(t) - 1e-9) return;
      }
    }
    double v = 0.0;
    for (int b = 0; b < n; ++b) {
      if (tau[b] <= T) v += std::pow(inst.rho, tau[b]) * inst.values[b];
    }
    best = std::max(best, v);
  };
  rec(0);
  return best;
}

OpbspInstance random_instance(testing::Rng& rng, int n, int T, bool capacities) {
  OpbspInstance inst;
  for (int i = 0; i < n; ++i) {
    inst.block_ids.push_back(i);
    inst.values.push_back(std::round(rng.uniform(-4, 6) * 4) / 4);
    inst.resource_use.push_back(rng.integer(1, 3));
  }
  inst.resource_names = {"tonnage"};
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (rng.coin(0.3)) inst.arcs.emplace_back(i, j);
    }
  }
  inst.horizon = T;
  inst.rho = rng.uniform(0.5, 0.95);
  if (capacities) {
    ResourceLimit lim{"tonnage", {static_cast<double>(rng.integer(2, 5))}, {}};
    if (rng.coin(0.3)) lim.lower = {1.0};
    inst.capacities.limits.push_back(lim);
  }
  return inst;
}

LpModel random_lp(testing::Rng& rng, int n, int m) {
  LpModel lp;
  lp.maximize = rng.coin();
  for (int j = 0; j < n; ++j) {
    const double lo = rng.integer(-3, 1);
    lp.variables.push_back({"x" + std::to_string(j), lo, lo + rng.integer(0, 4),
                            static_cast<double>(rng.integer(-5, 5)), false});
  }
  for (int r = 0; r < m; ++r) {
    LpRow row;
    row.name = "r" + std::to_string(r);
    for (int j = 0; j < n; ++j) {
      if (rng.coin(0.6)) row.terms.push_back({j, static_cast<double>(rng.integer(-3, 3))});
    }
    const int s = rng.integer(0, 4);
    row.sense = s < 3 ? RowSense::kLessEqual : (s == 3 ? RowSense::kGreaterEqual : RowSense::kEqual);
    row.rhs = rng.integer(-4, 6);
    lp.rows.push_back(row);
  }
  return lp;
}

}  // namespace

TEST_CASE("model layout of a two-block chain") {
  OpbspInstance inst;
  inst.block_ids = {0, 1};
  inst.values = {1, 2};
  inst.arcs = {{1, 0}};
  inst.horizon = 2;
  inst.rho = 0.9;
  const auto m = build_opbsp_model(inst);
  CHECK(m.num_variables() == 4);
  int prec = 0, mono = 0;
  for (const auto& r : m.rows) {
    prec += r.name.rfind("prec_", 0) == 0;
    mono += r.name.rfind("mono_", 0) == 0;
  }
  CHECK(prec == 2);
  CHECK(mono == 2);
  CHECK(m.num_rows() == 4);
  CHECK(m.variables[m.var_index(1, 2)].name == "y_1_2");

  inst.arcs.emplace_back(0, 5);
  CHECK_THROWS_AS(build_opbsp_model(inst), ModelError);
}

TEST_CASE("single block LP") {
  const auto block = testing::row_model({{10}});
  const auto m = build_opbsp_model(block, derive_precedences(block), 1, 0.9,
                                   Capacities::unlimited());
  const auto sol = solve_lp_relaxation(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(sol.values[0] == doctest::Approx(1.0));
  CHECK(integer_opt_small(m) == doctest::Approx(9.0).epsilon(1e-12));

  const auto negative = testing::row_model({{-3}});
  const auto mn = build_opbsp_model(negative, derive_precedences(negative), 1, 0.9,
                                    Capacities::unlimited());
  CHECK(solve_lp_relaxation(mn).objective == 0.0);
  CHECK(integer_opt_small(mn) == 0.0);
}

TEST_CASE("zero capacity leaves nothing to extract") {
  const auto block = testing::row_model({{10, 3}});
  const auto m = build_opbsp_model(block, derive_precedences(block), 2, 0.9,
                                   Capacities::constant("tonnage", 0.0));
  const auto sol = solve_lp_relaxation(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("simplex matches vertex enumeration on random LPs") {
  testing::Rng rng(12);
  int infeasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto lp = random_lp(rng, rng.integer(1, 5), rng.integer(1, 5));
    const auto want = testing::lp_vertex_oracle(lp);
    const auto got = solve_lp_relaxation(lp);
    if (!want) {
      ++infeasible;
      CHECK(got.status == LpStatus::kInfeasible);
      continue;
    }
    REQUIRE(got.status == LpStatus::kOptimal);
    CHECK(got.objective == doctest::Approx(*want).epsilon(1e-7));
    CHECK(lp.max_violation(got.values) <= 1e-7);
    CHECK(lp.objective_value(got.values) == doctest::Approx(got.objective).epsilon(1e-9));
  }
  CHECK(infeasible > 0);
}

TEST_CASE("simplex matches vertex enumeration on OPBSP relaxations") {
  testing::Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.integer(1, 3);
    const int T = rng.integer(1, 2);
    const auto lp = build_opbsp_model(random_instance(rng, n, T, rng.coin()));
    const auto want = testing::lp_vertex_oracle(lp);
    REQUIRE(want);
    const auto got = solve_lp_relaxation(lp);
    REQUIRE(got.status == LpStatus::kOptimal);
    CHECK(got.objective == doctest::Approx(*want).epsilon(1e-7));
  }
}

TEST_CASE("integer enumeration equals direct schedule enumeration") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = rng.integer(1, 5);
    const int T = rng.integer(1, std::max(1, 12 / n));
    const auto inst = random_instance(rng, n, T, rng.coin());
    const auto lp = build_opbsp_model(inst);
    const double ilp = integer_opt_small(lp);
    const double want = schedule_enumeration(inst);
    if (std::isinf(want)) {
      CHECK(ilp == want);
      continue;
    }
    CHECK(ilp == doctest::Approx(want).epsilon(1e-12));
    const auto relax = solve_lp_relaxation(lp);
    if (relax.status == LpStatus::kOptimal) CHECK(relax.objective >= ilp - 1e-7);
    if (inst.capacities.empty()) {
      // Precedence and nesting rows alone give an integral polytope.
      REQUIRE(relax.status == LpStatus::kOptimal);
      CHECK(relax.objective == doctest::Approx(ilp).epsilon(1e-7));
    }
  }
}

TEST_CASE("infeasible and unbounded programs") {
  LpModel lp;
  lp.variables.push_back({"x", 0, 1, 1, false});
  lp.rows.push_back({"r", {{0, 1.0}}, RowSense::kGreaterEqual, 2.0});
  CHECK(solve_lp_relaxation(lp).status == LpStatus::kInfeasible);
  CHECK(integer_opt_small(lp) == -kInf);

  LpModel open;
  open.variables.push_back({"x", 0, kInf, 1, false});
  open.variables.push_back({"y", 0, kInf, 0, false});
  open.rows.push_back({"r", {{0, 1.0}, {1, -1.0}}, RowSense::kLessEqual, 1.0});
  CHECK(solve_lp_relaxation(open).status == LpStatus::kUnbounded);
}

TEST_CASE("solver budgets") {
  testing::Rng rng(1);
  const auto m = testing::random_model(rng, {3, 3, 3});
  const auto lp = build_opbsp_model(m, derive_precedences(m), 4, 0.9, Capacities::unlimited());
  SimplexOptions o;
  o.max_variables = 10;
  const auto sol = solve_lp_relaxation(lp, o);
  CHECK(sol.status == LpStatus::kBudgetExceeded);
  CHECK(sol.message.find("lp-export") != std::string::npos);
  CHECK_THROWS_AS(integer_opt_small(lp), BudgetExceeded);
}

TEST_CASE("expected extraction times") {
  const auto m = testing::row_model({{1}, {2}});
  const auto lp = build_opbsp_model(m, derive_precedences(m), 3, 0.9, Capacities::unlimited());
  LpSolution sol;
  sol.values = {0, 0, 1, 0.25, 0.25, 0.5};
  const auto e = expected_extraction_times(lp, sol);
  CHECK(e[0] == 3.0);
  // 0.25 * 1 + 0.25 * 3 + 0.5 * 4
  CHECK(e[1] == 3.0);
  sol.values.pop_back();
  CHECK_THROWS_AS(expected_extraction_times(lp, sol), UsageError);
}

TEST_CASE("LP and MPS writers") {
  LpModel m;
  m.name = "single";
  m.variables.push_back({"y_0_1", 0, 1, 9, true});
  m.rows.push_back({"cap_tonnage_1", {{0, 1.0}}, RowSense::kLessEqual, 1.5});
  std::ostringstream lp;
  write_lp(m, lp);
  CHECK(lp.str() ==
        "\\ single\n"
        "Maximize\n"
        " obj: 9 y_0_1\n"
        "Subject To\n"
        " cap_tonnage_1: 1 y_0_1 <= 1.5\n"
        "Bounds\n"
        "Binaries\n"
        " y_0_1\n"
        "End\n");
  std::ostringstream again;
  write_lp(m, again);
  CHECK(again.str() == lp.str());
}

TEST_CASE("exported models read back to the same program") {
  testing::Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = testing::random_model(rng, {rng.integer(1, 3), rng.integer(1, 2), 2});
    Capacities caps;
    if (rng.coin()) caps = Capacities::constant("tonnage", rng.integer(3, 6));
    const auto lp = build_opbsp_model(m, derive_precedences(m), rng.integer(1, 3), 1 / 1.1, caps);
    const auto direct = solve_lp_relaxation(lp);
    REQUIRE(direct.status == LpStatus::kOptimal);
    for (auto fmt : {LpFormat::kLp, LpFormat::kMps}) {
      std::stringstream text;
      fmt == LpFormat::kLp ? write_lp(lp, text) : write_mps(lp, text);
      const auto back = fmt == LpFormat::kLp ? read_lp(text) : read_mps(text);
      REQUIRE(back.num_variables() == lp.num_variables());
      CHECK(back.num_rows() == lp.num_rows());
      for (int j = 0; j < lp.num_variables(); ++j) {
        CHECK(back.variables[j].name == lp.variables[j].name);
        CHECK(back.variables[j].integer);
      }
      const auto sol = solve_lp_relaxation(back);
      REQUIRE(sol.status == LpStatus::kOptimal);
      CHECK(sol.objective == doctest::Approx(direct.objective).epsilon(1e-9));
      std::stringstream rewritten;
      fmt == LpFormat::kLp ? write_lp(back, rewritten) : write_mps(back, rewritten);
      std::stringstream original;
      fmt == LpFormat::kLp ? write_lp(lp, original) : write_mps(lp, original);
      CHECK(rewritten.str() == original.str());
    }
  }
}

TEST_CASE("solution JSON round trip") {
  const auto m = testing::row_model({{4, -1}});
  const auto lp = build_opbsp_model(m, derive_precedences(m), 2, 0.9, Capacities::unlimited());
  const auto sol = solve_lp_relaxation(lp);
  const auto j = solution_to_json(lp, sol);
  CHECK(j.at("status") == "optimal");
  CHECK(solution_from_json(lp, j) == sol.values);
  CHECK(solution_from_json(lp, nlohmann::json{{"y_0_2", 1.0}})[1] == 1.0);
  CHECK(lp_format_for_path("a/b.MPS") == LpFormat::kMps);
  CHECK(lp_format_for_path("model.lp") == LpFormat::kLp);
  CHECK_THROWS_AS(lp_format_from_string("xml"), UsageError);
}
