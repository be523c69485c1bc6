#include <catch2/catch_amalgamated.hpp>

#include "scansat/solver.hpp"

using namespace scansat;

namespace {

// brute-force satisfiability over n variables
bool brute_sat(int n, const std::vector<std::vector<int>>& clauses)
{
    for (uint64_t m = 0; m < (uint64_t(1) << n); ++m) {
        bool all = true;
        for (auto& c : clauses) {
            bool sat = false;
            for (int l : c) {
                int v = l > 0 ? l : -l;
                bool val = (m >> (v - 1)) & 1;
                if ((l > 0) == val) {
                    sat = true;
                    break;
                }
            }
            if (!sat) {
                all = false;
                break;
            }
        }
        if (all)
            return true;
    }
    return false;
}

}  // namespace

TEST_CASE("solver handles trivial formulas")
{
    SECTION("single unit")
    {
        Solver s;
        int x = s.new_var();
        s.add_clause({x});
        REQUIRE(s.solve() == Solver::Status::Sat);
        CHECK(s.value(x));
    }
    SECTION("contradicting units")
    {
        Solver s;
        int x = s.new_var();
        s.add_clause({x});
        CHECK_FALSE(s.add_clause({-x}));
        CHECK(s.solve() == Solver::Status::Unsat);
    }
    SECTION("xor chain forces values")
    {
        Solver s;
        int a = s.new_var(), b = s.new_var();
        // a xor b = 1
        s.add_clause({a, b});
        s.add_clause({-a, -b});
        s.add_clause({a});
        REQUIRE(s.solve() == Solver::Status::Sat);
        CHECK(s.value(a));
        CHECK_FALSE(s.value(b));
    }
}

TEST_CASE("pigeonhole 4 into 3 is unsat")
{
    Solver s;
    int p[4][3];
    for (auto& row : p)
        for (auto& v : row)
            v = s.new_var();
    for (int i = 0; i < 4; ++i)
        s.add_clause({p[i][0], p[i][1], p[i][2]});
    for (int h = 0; h < 3; ++h)
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                s.add_clause({-p[i][h], -p[j][h]});
    CHECK(s.solve() == Solver::Status::Unsat);
}

TEST_CASE("assumptions behave like temporary units")
{
    Solver s;
    int a = s.new_var(), b = s.new_var(), c = s.new_var();
    s.add_clause({-a, b});
    s.add_clause({-b, c});
    REQUIRE(s.solve({a}) == Solver::Status::Sat);
    CHECK(s.value(c));
    REQUIRE(s.solve({a, -c}) == Solver::Status::Unsat);
    // solver is reusable after an assumption failure
    REQUIRE(s.solve({-a}) == Solver::Status::Sat);
    REQUIRE(s.solve({a}) == Solver::Status::Sat);
}

TEST_CASE("incremental clause addition narrows models")
{
    Solver s;
    int a = s.new_var(), b = s.new_var();
    s.add_clause({a, b});
    REQUIRE(s.solve() == Solver::Status::Sat);
    s.add_clause({-a});
    REQUIRE(s.solve() == Solver::Status::Sat);
    CHECK(s.value(b));
    s.add_clause({-b});
    CHECK(s.solve() == Solver::Status::Unsat);
    // once unsat, stays unsat
    CHECK(s.solve() == Solver::Status::Unsat);
}

TEST_CASE("random 3-sat agrees with brute force")
{
    Rng rng(20240917);
    for (int inst = 0; inst < 80; ++inst) {
        int n = 6 + static_cast<int>(rng.below(10));       // 6..15 vars
        int m = static_cast<int>(rng.below(4 * n)) + n;    // up to ~5n clauses
        std::vector<std::vector<int>> clauses;
        for (int i = 0; i < m; ++i) {
            std::vector<int> c;
            for (int k = 0; k < 3; ++k) {
                int v = 1 + static_cast<int>(rng.below(n));
                c.push_back(rng.coin() ? v : -v);
            }
            clauses.push_back(c);
        }
        Solver s;
        for (int v = 0; v < n; ++v)
            s.new_var();
        bool ok = true;
        for (auto& c : clauses)
            ok = s.add_clause(c) && ok;
        Solver::Status st = ok ? s.solve() : Solver::Status::Unsat;
        bool expect = brute_sat(n, clauses);
        INFO("instance " << inst << " n=" << n << " m=" << m);
        REQUIRE((st == Solver::Status::Sat) == expect);
        if (st == Solver::Status::Sat) {
            // model must satisfy every clause
            for (auto& c : clauses) {
                bool sat = false;
                for (int l : c)
                    if ((l > 0) == s.value(l > 0 ? l : -l))
                        sat = true;
                REQUIRE(sat);
            }
        }
    }
}

TEST_CASE("conflict budget reports unknown")
{
    // A hard-ish pigeonhole so the tiny budget trips first.
    Solver s;
    const int holes = 6, pigeons = 7;
    std::vector<std::vector<int>> p(pigeons, std::vector<int>(holes));
    for (auto& row : p)
        for (auto& v : row)
            v = s.new_var();
    for (int i = 0; i < pigeons; ++i) {
        std::vector<int> c;
        for (int h = 0; h < holes; ++h)
            c.push_back(p[i][h]);
        s.add_clause(c);
    }
    for (int h = 0; h < holes; ++h)
        for (int i = 0; i < pigeons; ++i)
            for (int j = i + 1; j < pigeons; ++j)
                s.add_clause({-p[i][h], -p[j][h]});
    CHECK(s.solve({}, 5) == Solver::Status::Unknown);
    // and without a budget it finishes
    CHECK(s.solve() == Solver::Status::Unsat);
}
