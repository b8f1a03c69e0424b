// SPDX-License-Identifier: Apache-2.0
#include "hems/core/lp.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using hems::lp::kInfinity;
using hems::lp::LinearProgram;
using hems::lp::Status;

namespace {

// Enumerates every basic solution of a small bounded LP: choose m basic
// columns, put the rest on a bound, solve the m x m system by Gauss-Jordan.
double vertex_enumeration_optimum(const LinearProgram& lp, bool& feasible)
{
    const std::size_t n = lp.variable_count();
    const std::size_t m = lp.row_count();
    std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& t : lp.row(i))
            a[i][t.column] += t.coefficient;

    double best = std::numeric_limits<double>::infinity();
    feasible = false;
    for (unsigned basis = 0; basis < (1u << n); ++basis) {
        if (static_cast<std::size_t>(__builtin_popcount(basis)) != m)
            continue;
        std::vector<std::size_t> nonbasic;
        std::vector<std::size_t> basic;
        for (std::size_t j = 0; j < n; ++j)
            ((basis >> j) & 1u ? basic : nonbasic).push_back(j);
        for (unsigned bounds = 0; bounds < (1u << nonbasic.size()); ++bounds) {
            std::vector<double> x(n, 0.0);
            bool finite = true;
            for (std::size_t k = 0; k < nonbasic.size(); ++k) {
                const std::size_t j = nonbasic[k];
                x[j] = (bounds >> k) & 1u ? lp.upper(j) : lp.lower(j);
                finite = finite && std::isfinite(x[j]);
            }
            if (!finite)
                continue;
            std::vector<std::vector<double>> sys(m, std::vector<double>(m + 1, 0.0));
            for (std::size_t i = 0; i < m; ++i) {
                double rhs = lp.rhs(i);
                for (std::size_t j : nonbasic)
                    rhs -= a[i][j] * x[j];
                for (std::size_t k = 0; k < m; ++k)
                    sys[i][k] = a[i][basic[k]];
                sys[i][m] = rhs;
            }
            bool singular = false;
            for (std::size_t c = 0; c < m && !singular; ++c) {
                std::size_t p = c;
                for (std::size_t r = c; r < m; ++r)
                    if (std::abs(sys[r][c]) > std::abs(sys[p][c]))
                        p = r;
                if (std::abs(sys[p][c]) < 1e-12) {
                    singular = true;
                    break;
                }
                std::swap(sys[p], sys[c]);
                for (std::size_t r = 0; r < m; ++r) {
                    if (r == c)
                        continue;
                    const double f = sys[r][c] / sys[c][c];
                    for (std::size_t k = c; k <= m; ++k)
                        sys[r][k] -= f * sys[c][k];
                }
            }
            if (singular)
                continue;
            for (std::size_t k = 0; k < m; ++k)
                x[basic[k]] = sys[k][m] / sys[k][k];
            if (lp.max_violation(x) > 1e-9)
                continue;
            feasible = true;
            best = std::min(best, lp.objective(x));
        }
    }
    return best;
}

} // namespace

TEST_CASE("simplex solves a textbook bounded LP")
{
    // min -x - 2y  s.t. x + y + s = 4, x in [0, 3], y in [0, 2], s >= 0
    LinearProgram lp;
    auto x = lp.add_variable(-1.0, 0.0, 3.0);
    auto y = lp.add_variable(-2.0, 0.0, 2.0);
    auto s = lp.add_variable(0.0, 0.0, kInfinity);
    lp.add_row({{x, 1.0}, {y, 1.0}, {s, 1.0}}, 4.0);
    auto sol = hems::lp::solve(lp);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.x[x] == doctest::Approx(2.0));
    CHECK(sol.x[y] == doctest::Approx(2.0));
    CHECK(sol.objective == doctest::Approx(-6.0));
}

TEST_CASE("simplex honours nonzero lower bounds and equality rows")
{
    // min x + y  s.t. x - y = 1, x in [2, 10], y in [0.5, 10]
    LinearProgram lp;
    auto x = lp.add_variable(1.0, 2.0, 10.0);
    auto y = lp.add_variable(1.0, 0.5, 10.0);
    lp.add_row({{x, 1.0}, {y, -1.0}}, 1.0);
    auto sol = hems::lp::solve(lp);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.x[x] == doctest::Approx(2.0));
    CHECK(sol.x[y] == doctest::Approx(1.0));
}

TEST_CASE("simplex reports infeasible and unbounded programs")
{
    LinearProgram infeasible;
    auto x = infeasible.add_variable(0.0, 0.0, 1.0);
    infeasible.add_row({{x, 1.0}}, 2.0);
    CHECK(hems::lp::solve(infeasible).status == Status::infeasible);

    LinearProgram unbounded;
    auto u = unbounded.add_variable(-1.0, 0.0, kInfinity);
    auto v = unbounded.add_variable(0.0, 0.0, kInfinity);
    unbounded.add_row({{u, 1.0}, {v, -1.0}}, 0.0);
    CHECK(hems::lp::solve(unbounded).status == Status::unbounded);

    LinearProgram crossed;
    crossed.add_variable(0.0, 1.0, 0.0);
    CHECK(hems::lp::solve(crossed).status == Status::infeasible);
}

TEST_CASE("simplex handles redundant rows")
{
    LinearProgram lp;
    auto x = lp.add_variable(1.0, 0.0, 5.0);
    auto y = lp.add_variable(2.0, 0.0, 5.0);
    lp.add_row({{x, 1.0}, {y, 1.0}}, 3.0);
    lp.add_row({{x, 2.0}, {y, 2.0}}, 6.0);
    auto sol = hems::lp::solve(lp);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(lp.max_violation(sol.x) < 1e-9);
}

TEST_CASE("simplex matches vertex enumeration on random small programs")
{
    std::mt19937_64 rng(20240916);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_int_distribution<int> small(0, 4);
    int feasible_count = 0;
    for (int trial = 0; trial < 300; ++trial) {
        LinearProgram lp;
        const std::size_t n = 3 + static_cast<std::size_t>(trial % 3);
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 2);
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = small(rng) - 2.0;
            lp.add_variable(coef(rng), lo, lo + 1.0 + small(rng));
        }
        std::vector<double> anchor(n);
        for (std::size_t j = 0; j < n; ++j)
            anchor[j] = lp.lower(j) + 0.5 * (lp.upper(j) - lp.lower(j));
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<hems::lp::Term> terms;
            double rhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double c = std::round(coef(rng));
                if (c == 0.0)
                    continue;
                terms.push_back({j, c});
                rhs += c * anchor[j];
            }
            // Every third program is pushed off its feasible anchor.
            if (trial % 3 == 0)
                rhs += 4.0 * coef(rng);
            lp.add_row(std::move(terms), rhs);
        }
        bool feasible = false;
        const double oracle = vertex_enumeration_optimum(lp, feasible);
        const auto sol = hems::lp::solve(lp);
        CAPTURE(trial);
        if (!feasible) {
            CHECK(sol.status == Status::infeasible);
            continue;
        }
        ++feasible_count;
        REQUIRE(sol.status == Status::optimal);
        CHECK(lp.max_violation(sol.x) < 1e-8);
        CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-9));
    }
    CHECK(feasible_count > 200);
}
