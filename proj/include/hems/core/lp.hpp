// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace hems::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Term {
    std::size_t column;
    double coefficient;
};

/// Linear program in equality form:
///   minimize  c'x  subject to  A x = b,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
class LinearProgram {
public:
    std::size_t add_variable(double cost, double lower, double upper, std::string name = {});
    std::size_t add_row(std::vector<Term> terms, double rhs, std::string name = {});

    std::size_t variable_count() const { return cost_.size(); }
    std::size_t row_count() const { return rhs_.size(); }

    double cost(std::size_t j) const { return cost_[j]; }
    double lower(std::size_t j) const { return lower_[j]; }
    double upper(std::size_t j) const { return upper_[j]; }
    const std::string& variable_name(std::size_t j) const { return names_[j]; }

    const std::vector<Term>& row(std::size_t i) const { return rows_[i]; }
    double rhs(std::size_t i) const { return rhs_[i]; }
    const std::string& row_name(std::size_t i) const { return row_names_[i]; }

    double objective(const std::vector<double>& x) const;
    /// Largest absolute equality residual or bound excess of x.
    double max_violation(const std::vector<double>& x) const;

private:
    std::vector<double> cost_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::string> names_;
    std::vector<std::vector<Term>> rows_;
    std::vector<double> rhs_;
    std::vector<std::string> row_names_;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(Status status);

struct SimplexOptions {
    double feasibility_tolerance = 1e-9;
    /// Relative to the largest absolute cost coefficient.
    double optimality_tolerance = 1e-10;
    double pivot_tolerance = 1e-9;
    /// 0 selects a limit proportional to the problem size.
    std::size_t max_iterations = 0;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    std::size_t degenerate_switch = 50;
};

struct Solution {
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;
    /// Sum of artificial values left after phase one.
    double phase_one_residual = 0.0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau.
/// Deterministic: identical inputs give bitwise identical outputs.
Solution solve(const LinearProgram& program, const SimplexOptions& options = {});

} // namespace hems::lp
