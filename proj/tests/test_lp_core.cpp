#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "evflex/lp_core.hpp"
#include "evflex/rng.hpp"
#include "lp_brute_force.hpp"

using namespace evflex;
using namespace evflex::lp;

TEST_CASE("one variable at its lower bound") {
  LinearProgram lp;
  lp.add_variable("x", 0.0, kInf, 1.0);
  Solution s = solve(lp);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(0.0));
  CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("two-variable example with known dual") {
  // min 2x + 3y  s.t.  x + y >= 4, x <= 3, x,y >= 0  ->  x=3, y=1, obj 9
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, kInf, 2.0);
  int y = lp.add_variable("y", 0.0, kInf, 3.0);
  int demand = lp.add_row("demand", RowSense::ge, 4.0);
  lp.add_entry(demand, x, 1.0);
  lp.add_entry(demand, y, 1.0);
  int cap = lp.add_row("cap_x", RowSense::le, 3.0);
  lp.add_entry(cap, x, 1.0);

  Solution s = solve(lp);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.x[x] == doctest::Approx(3.0));
  CHECK(s.x[y] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(9.0));
  CHECK(s.row_dual[demand] == doctest::Approx(3.0));
  CHECK(s.row_dual[cap] == doctest::Approx(-1.0));

  CheckReport rep = verify(lp, s);
  CHECK(rep.ok);
  CHECK(rep.duality_gap_rel <= 1e-6);
}

TEST_CASE("conflicting rows are infeasible") {
  LinearProgram lp;
  int x = lp.add_variable("x", -kInf, kInf, 0.0);
  int r1 = lp.add_row("ge1", RowSense::ge, 1.0);
  lp.add_entry(r1, x, 1.0);
  int r2 = lp.add_row("le0", RowSense::le, 0.0);
  lp.add_entry(r2, x, 1.0);
  Solution s = solve(lp);
  CHECK(s.status == SolveStatus::infeasible);
  CHECK(!s.infeasible_rows.empty());
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, kInf, -1.0);
  int r = lp.add_row("r", RowSense::ge, 0.0);
  lp.add_entry(r, x, 1.0);
  Solution s = solve(lp);
  CHECK(s.status == SolveStatus::unbounded);
  CHECK(s.unbounded_var == x);
}

TEST_CASE("verify flags a corrupted primal") {
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, 5.0, 1.0);
  int r = lp.add_row("r", RowSense::ge, 2.0);
  lp.add_entry(r, x, 1.0);
  Solution s = solve(lp);
  REQUIRE(s.status == SolveStatus::optimal);
  REQUIRE(verify(lp, s).ok);
  s.x[0] = 0.5;  // violates the row
  CheckReport rep = verify(lp, s);
  CHECK(!rep.ok);
  CHECK(rep.max_row_violation > 1.0);
}

TEST_CASE("zero-variable model verifies vacuously") {
  LinearProgram lp;
  lp.add_row("nothing", RowSense::le, 1.0);
  Solution s = solve(lp);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(0.0));
  CHECK(verify(lp, s).ok);
}

TEST_CASE("equality row pins a variable") {
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, 10.0, 1.0);
  int y = lp.add_variable("y", 0.0, 10.0, -0.5);
  int r = lp.add_row("bal", RowSense::eq, 7.0);
  lp.add_entry(r, x, 1.0);
  lp.add_entry(r, y, 1.0);
  Solution s = solve(lp);
  REQUIRE(s.status == SolveStatus::optimal);
  // y is the cheaper way to satisfy the balance
  CHECK(s.x[y] == doctest::Approx(7.0));
  CHECK(s.x[x] == doctest::Approx(0.0));
  CHECK(verify(lp, s).ok);
}

TEST_CASE("random small models match vertex enumeration") {
  Rng rng(20240817ULL);
  int optimal_count = 0, infeasible_count = 0;
  for (int trial = 0; trial < 400; ++trial) {
    LinearProgram lp = testutil::random_boxed_lp(rng);
    testutil::BruteForceResult oracle = testutil::brute_force_solve(lp);
    Solution s = solve(lp);
    INFO("trial ", trial);
    if (oracle.feasible) {
      REQUIRE(s.status == SolveStatus::optimal);
      CHECK(std::fabs(s.objective - oracle.objective) <= 1e-8 * (1 + std::fabs(oracle.objective)));
      CheckReport rep = verify(lp, s);
      CHECK(rep.ok);
      CHECK(rep.duality_gap_rel <= 1e-6);
      ++optimal_count;
    } else {
      REQUIRE(s.status == SolveStatus::infeasible);
      ++infeasible_count;
    }
  }
  // the generator must exercise both outcomes
  CHECK(optimal_count > 100);
  CHECK(infeasible_count > 20);
}

TEST_CASE("identical model gives identical solution bytes") {
  auto build = [] {
    LinearProgram lp;
    int x = lp.add_variable("x", 0.0, 4.0, 1.25);
    int y = lp.add_variable("y", 0.0, 9.0, -0.75);
    int z = lp.add_variable("z", -2.0, 2.0, 0.125);
    int r1 = lp.add_row("r1", RowSense::ge, 3.0);
    lp.add_entry(r1, x, 1.0);
    lp.add_entry(r1, y, 2.0);
    int r2 = lp.add_row("r2", RowSense::le, 5.0);
    lp.add_entry(r2, y, 1.0);
    lp.add_entry(r2, z, -1.0);
    return lp;
  };
  Solution a = solve(build());
  Solution b = solve(build());
  CHECK(a.to_bytes() == b.to_bytes());
}

TEST_CASE("lp text round-trips") {
  Rng rng(99ULL);
  for (int trial = 0; trial < 50; ++trial) {
    LinearProgram lp = testutil::random_boxed_lp(rng);
    std::stringstream ss;
    write_lp_text(lp, ss);
    LinearProgram back = read_lp_text(ss);
    std::stringstream ss2;
    write_lp_text(back, ss2);
    ss.clear();
    ss.seekg(0);
    CHECK(ss.str() == ss2.str());
    // solving both gives the same outcome
    Solution s1 = solve(lp);
    Solution s2 = solve(back);
    CHECK(s1.to_bytes() == s2.to_bytes());
  }
}

TEST_CASE("file-exchange backend round-trips through an external command") {
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, kInf, 2.0);
  int y = lp.add_variable("y", 0.0, kInf, 3.0);
  int r = lp.add_row("demand", RowSense::ge, 4.0);
  lp.add_entry(r, x, 1.0);
  lp.add_entry(r, y, 1.0);
  int cap = lp.add_row("cap", RowSense::le, 3.0);
  lp.add_entry(cap, x, 1.0);

  // stand-in external solver: a script that hands back a canned solution
  Solution reference = solve(lp);
  {
    std::ofstream canned("/tmp/evflex_canned_solution.txt");
    write_solution_text(reference, canned);
  }
  {
    std::ofstream script("/tmp/evflex_fake_solver.sh");
    script << "#!/bin/sh\n";
    // the backend passes <problem> <solution>; check the problem parses back
    script << "grep -q '^minimize' \"$1\" || exit 9\n";
    script << "cp /tmp/evflex_canned_solution.txt \"$2\"\n";
  }
  FileExchangeBackend backend("/bin/sh /tmp/evflex_fake_solver.sh", "/tmp");
  Solution got = backend.solve(lp, Tolerances{});
  CHECK(got.status == SolveStatus::optimal);
  CHECK(got.objective == reference.objective);
  REQUIRE(got.x.size() == reference.x.size());
  CHECK(got.x[0] == reference.x[0]);
  CHECK(got.row_dual[0] == reference.row_dual[0]);
  // the returned point verifies against the model like any other
  got.reduced_cost = reference.reduced_cost;
  CHECK(verify(lp, got).ok);
}

TEST_CASE("solution text round-trips") {
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, 3.0, -1.0);
  int r = lp.add_row("r", RowSense::le, 2.5);
  lp.add_entry(r, x, 1.0);
  Solution s = solve(lp);
  std::stringstream ss;
  write_solution_text(s, ss);
  Solution back = read_solution_text(ss);
  CHECK(back.status == s.status);
  CHECK(back.objective == s.objective);
  REQUIRE(back.x.size() == s.x.size());
  CHECK(back.x[0] == s.x[0]);
}
