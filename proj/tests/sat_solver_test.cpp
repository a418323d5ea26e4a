#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "puzznic/sat/solver.hpp"

namespace {

using Cnf = std::vector<std::vector<int>>;

bool satisfies(const Cnf& cnf, unsigned mask) {
  for (const auto& clause : cnf) {
    bool sat = false;
    for (int lit : clause) {
      bool v = (mask >> (std::abs(lit) - 1)) & 1u;
      if ((lit > 0) == v) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

bool brute_force(const Cnf& cnf, int vars, const std::vector<int>& assumptions = {}) {
  for (unsigned mask = 0; mask < (1u << vars); ++mask) {
    bool ok = true;
    for (int a : assumptions)
      if (((mask >> (std::abs(a) - 1)) & 1u) != (a > 0 ? 1u : 0u)) ok = false;
    if (ok && satisfies(cnf, mask)) return true;
  }
  return false;
}

Cnf random_cnf(std::mt19937& rng, int vars, int clauses, int width) {
  Cnf cnf;
  std::uniform_int_distribution<int> var(1, vars);
  std::bernoulli_distribution sign(0.5);
  for (int i = 0; i < clauses; ++i) {
    std::vector<int> c;
    for (int k = 0; k < width; ++k) c.push_back(sign(rng) ? var(rng) : -var(rng));
    cnf.push_back(c);
  }
  return cnf;
}

TEST(SatSolver, EmptyFormulaIsSat) {
  puzznic::sat::Solver s;
  EXPECT_EQ(s.solve(), puzznic::sat::Status::Sat);
}

TEST(SatSolver, EmptyClauseIsUnsat) {
  puzznic::sat::Solver s;
  s.ensure_vars(1);
  std::vector<int> none;
  EXPECT_FALSE(s.add_clause(none));
  EXPECT_EQ(s.solve(), puzznic::sat::Status::Unsat);
}

TEST(SatSolver, AgreesWithEnumerationOnRandom3Sat) {
  std::mt19937 rng(12345);
  int sat = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int vars = 8 + trial % 7;
    Cnf cnf = random_cnf(rng, vars, static_cast<int>(vars * 4.3), 3);
    puzznic::sat::Solver s;
    s.ensure_vars(vars);
    for (auto& c : cnf) s.add_clause(c);
    auto status = s.solve();
    bool expected = brute_force(cnf, vars);
    ASSERT_EQ(status == puzznic::sat::Status::Sat, expected) << "trial " << trial;
    if (expected) {
      ++sat;
      unsigned mask = 0;
      for (int v = 1; v <= vars; ++v)
        if (s.model_value(v)) mask |= 1u << (v - 1);
      ASSERT_TRUE(satisfies(cnf, mask));
    }
  }
  EXPECT_GT(sat, 50);
  EXPECT_LT(sat, 350);
}

TEST(SatSolver, IncrementalAssumptionsMatchEnumeration) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int vars = 10;
    Cnf cnf = random_cnf(rng, vars, 35, 3);
    puzznic::sat::Solver s;
    s.ensure_vars(vars);
    for (auto& c : cnf) s.add_clause(c);
    // Several assumption sets against one solver instance.
    for (int q = 0; q < 6; ++q) {
      std::vector<int> assume;
      std::uniform_int_distribution<int> v(1, vars);
      for (int k = 0; k < q; ++k) assume.push_back(rng() & 1 ? v(rng) : -v(rng));
      auto status = s.solve(assume);
      ASSERT_EQ(status == puzznic::sat::Status::Sat, brute_force(cnf, vars, assume))
          << "trial " << trial << " query " << q;
    }
  }
}

TEST(SatSolver, PigeonholeFiveIntoFourIsUnsat) {
  // p(i, j): pigeon i in hole j.
  puzznic::sat::Solver s;
  auto p = [](int i, int j) { return i * 4 + j + 1; };
  for (int i = 0; i < 5; ++i) {
    std::vector<int> c;
    for (int j = 0; j < 4; ++j) c.push_back(p(i, j));
    s.add_clause(c);
  }
  for (int j = 0; j < 4; ++j)
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b) s.add_clause({-p(a, j), -p(b, j)});
  EXPECT_EQ(s.solve(), puzznic::sat::Status::Unsat);
}

}  // namespace
