// SPDX-License-Identifier: Apache-2.0
#include "hems/core/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace hems::lp {

std::size_t LinearProgram::add_variable(double cost, double lower, double upper, std::string name)
{
    if (!std::isfinite(lower))
        throw std::invalid_argument("variable lower bound must be finite: " + name);
    if (std::isnan(upper) || !std::isfinite(cost))
        throw std::invalid_argument("invalid bound or cost for variable " + name);
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    names_.push_back(std::move(name));
    return cost_.size() - 1;
}

std::size_t LinearProgram::add_row(std::vector<Term> terms, double rhs, std::string name)
{
    for (const auto& term : terms) {
        if (term.column >= cost_.size())
            throw std::out_of_range("row references unknown variable: " + name);
    }
    rows_.push_back(std::move(terms));
    rhs_.push_back(rhs);
    row_names_.push_back(std::move(name));
    return rhs_.size() - 1;
}

double LinearProgram::objective(const std::vector<double>& x) const
{
    double total = 0.0;
    for (std::size_t j = 0; j < cost_.size(); ++j)
        total += cost_[j] * x[j];
    return total;
}

double LinearProgram::max_violation(const std::vector<double>& x) const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double lhs = 0.0;
        for (const auto& term : rows_[i])
            lhs += term.coefficient * x[term.column];
        worst = std::max(worst, std::abs(lhs - rhs_[i]));
    }
    for (std::size_t j = 0; j < cost_.size(); ++j) {
        worst = std::max(worst, lower_[j] - x[j]);
        worst = std::max(worst, x[j] - upper_[j]);
    }
    return worst;
}

std::string to_string(Status status)
{
    switch (status) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

enum class VarState : std::uint8_t { basic, at_lower, at_upper };

enum class StepResult { optimal, unbounded, iteration_limit };

// Variables are shifted so every lower bound is zero; `upper_` holds the
// shifted range. Rows of `cells_` hold B^-1 A, `beta_` the basic values.
class Tableau {
public:
    Tableau(const LinearProgram& program, const SimplexOptions& options)
        : options_(options), structural_(program.variable_count()), rows_(program.row_count())
    {
        std::vector<double> shifted_rhs(rows_);
        std::vector<std::size_t> column_count(structural_, 0);
        std::vector<double> dense(rows_ * structural_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double rhs = program.rhs(i);
            for (const auto& term : program.row(i)) {
                dense[i * structural_ + term.column] += term.coefficient;
                rhs -= term.coefficient * program.lower(term.column);
            }
            shifted_rhs[i] = rhs;
        }
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < structural_; ++j)
                if (dense[i * structural_ + j] != 0.0)
                    ++column_count[j];

        // Crash basis: a column with a single nonzero whose implied value is
        // within its bounds serves as the row's initial basic variable.
        std::vector<std::size_t> crash(rows_, kNone);
        std::vector<char> taken(structural_, 0);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < structural_; ++j) {
                const double a = dense[i * structural_ + j];
                if (a == 0.0 || column_count[j] != 1 || taken[j])
                    continue;
                const double value = shifted_rhs[i] / a;
                const double range = program.upper(j) - program.lower(j);
                if (value >= -options_.feasibility_tolerance && value <= range + options_.feasibility_tolerance) {
                    crash[i] = j;
                    taken[j] = 1;
                    break;
                }
            }
            if (crash[i] == kNone)
                ++artificials_;
        }

        columns_ = structural_ + artificials_;
        cells_.assign(rows_ * columns_, 0.0);
        beta_.assign(rows_, 0.0);
        head_.assign(rows_, 0);
        upper_.assign(columns_, kInfinity);
        state_.assign(columns_, VarState::at_lower);
        for (std::size_t j = 0; j < structural_; ++j)
            upper_[j] = program.upper(j) - program.lower(j);

        std::size_t next_artificial = structural_;
        for (std::size_t i = 0; i < rows_; ++i) {
            double* row = &cells_[i * columns_];
            std::copy_n(&dense[i * structural_], structural_, row);
            if (crash[i] != kNone) {
                const std::size_t j = crash[i];
                const double scale = 1.0 / row[j];
                for (std::size_t k = 0; k < structural_; ++k)
                    row[k] *= scale;
                row[j] = 1.0;
                head_[i] = j;
                beta_[i] = std::clamp(shifted_rhs[i] * scale, 0.0, upper_[j]);
                state_[j] = VarState::basic;
            } else {
                const double sign = shifted_rhs[i] < 0.0 ? -1.0 : 1.0;
                if (sign < 0.0)
                    for (std::size_t k = 0; k < structural_; ++k)
                        row[k] = -row[k];
                row[next_artificial] = 1.0;
                head_[i] = next_artificial;
                beta_[i] = std::abs(shifted_rhs[i]);
                state_[next_artificial] = VarState::basic;
                ++next_artificial;
            }
            rhs_scale_ = std::max(rhs_scale_, std::abs(shifted_rhs[i]));
        }

        lower_ = std::vector<double>(structural_);
        for (std::size_t j = 0; j < structural_; ++j)
            lower_[j] = program.lower(j);

        max_iterations_ = options_.max_iterations ? options_.max_iterations : 50 * (rows_ + columns_) + 1000;
    }

    Solution run(const LinearProgram& program)
    {
        Solution solution;
        if (artificials_ > 0) {
            std::vector<double> phase_one(columns_, 0.0);
            std::fill(phase_one.begin() + static_cast<std::ptrdiff_t>(structural_), phase_one.end(), 1.0);
            const auto result = iterate(phase_one);
            if (result == StepResult::iteration_limit) {
                solution.status = Status::iteration_limit;
                solution.iterations = iterations_;
                return solution;
            }
            double residual = 0.0;
            for (std::size_t i = 0; i < rows_; ++i)
                if (head_[i] >= structural_)
                    residual += beta_[i];
            solution.phase_one_residual = residual;
            if (residual > 1e-8 * (1.0 + rhs_scale_)) {
                solution.status = Status::infeasible;
                solution.iterations = iterations_;
                return solution;
            }
            retire_artificials();
        }

        std::vector<double> phase_two(columns_, 0.0);
        for (std::size_t j = 0; j < structural_; ++j)
            phase_two[j] = program.cost(j);
        const auto result = iterate(phase_two);
        solution.iterations = iterations_;
        solution.x = primal();
        solution.objective = program.objective(solution.x);
        switch (result) {
        case StepResult::optimal: solution.status = Status::optimal; break;
        case StepResult::unbounded: solution.status = Status::unbounded; break;
        case StepResult::iteration_limit: solution.status = Status::iteration_limit; break;
        }
        return solution;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    double& at(std::size_t i, std::size_t j) { return cells_[i * columns_ + j]; }

    void price(const std::vector<double>& cost)
    {
        reduced_ = cost;
        for (std::size_t i = 0; i < rows_; ++i) {
            const double cb = cost[head_[i]];
            if (cb == 0.0)
                continue;
            const double* row = &cells_[i * columns_];
            for (std::size_t j = 0; j < columns_; ++j)
                reduced_[j] -= cb * row[j];
        }
        for (std::size_t i = 0; i < rows_; ++i)
            reduced_[head_[i]] = 0.0;
    }

    StepResult iterate(const std::vector<double>& cost)
    {
        price(cost);
        double cost_scale = 0.0;
        for (double c : cost)
            cost_scale = std::max(cost_scale, std::abs(c));
        const double tolerance = options_.optimality_tolerance * (cost_scale > 0.0 ? cost_scale : 1.0);

        bool bland = false;
        std::size_t degenerate_run = 0;
        for (;;) {
            if (iterations_ >= max_iterations_)
                return StepResult::iteration_limit;

            std::size_t entering = kNone;
            double best = 0.0;
            for (std::size_t j = 0; j < columns_; ++j) {
                if (state_[j] == VarState::basic || upper_[j] == 0.0)
                    continue;
                const double d = reduced_[j];
                double score = 0.0;
                if (state_[j] == VarState::at_lower && d < -tolerance)
                    score = -d;
                else if (state_[j] == VarState::at_upper && d > tolerance)
                    score = d;
                else
                    continue;
                if (bland) {
                    entering = j;
                    break;
                }
                if (score > best) {
                    best = score;
                    entering = j;
                }
            }
            if (entering == kNone)
                return StepResult::optimal;
            ++iterations_;

            const double direction = state_[entering] == VarState::at_lower ? 1.0 : -1.0;
            double step = upper_[entering];
            std::size_t leaving_row = kNone;
            for (std::size_t i = 0; i < rows_; ++i) {
                const double t = at(i, entering);
                if (std::abs(t) <= options_.pivot_tolerance)
                    continue;
                const double delta = direction * t;
                double limit;
                if (delta > 0.0) {
                    limit = beta_[i] / delta;
                } else {
                    const double range = upper_[head_[i]];
                    if (range == kInfinity)
                        continue;
                    limit = (range - beta_[i]) / -delta;
                }
                limit = std::max(limit, 0.0);
                if (limit < step - 1e-12) {
                    step = limit;
                    leaving_row = i;
                } else if (leaving_row != kNone && limit <= step + 1e-12) {
                    const bool prefer = bland ? head_[i] < head_[leaving_row]
                                              : std::abs(t) > std::abs(at(leaving_row, entering));
                    if (prefer) {
                        step = std::min(step, limit);
                        leaving_row = i;
                    }
                }
            }
            if (step == kInfinity)
                return StepResult::unbounded;

            if (step <= options_.feasibility_tolerance) {
                if (++degenerate_run >= options_.degenerate_switch)
                    bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }

            if (step > 0.0) {
                for (std::size_t i = 0; i < rows_; ++i) {
                    const double t = at(i, entering);
                    if (t != 0.0)
                        beta_[i] -= direction * step * t;
                }
            }

            if (leaving_row == kNone) {
                state_[entering] = direction > 0.0 ? VarState::at_upper : VarState::at_lower;
                continue;
            }

            const std::size_t leaving = head_[leaving_row];
            const double leaving_delta = direction * at(leaving_row, entering);
            state_[leaving] = leaving_delta > 0.0 ? VarState::at_lower : VarState::at_upper;
            beta_[leaving_row] = direction > 0.0 ? step : upper_[entering] - step;
            pivot(leaving_row, entering);
            for (std::size_t i = 0; i < rows_; ++i)
                if (i != leaving_row)
                    beta_[i] = std::clamp(beta_[i], 0.0, upper_[head_[i]]);
        }
    }

    void pivot(std::size_t r, std::size_t entering)
    {
        double* pivot_row = &cells_[r * columns_];
        const double inverse = 1.0 / pivot_row[entering];
        nonzero_.clear();
        for (std::size_t k = 0; k < columns_; ++k) {
            if (pivot_row[k] == 0.0)
                continue;
            pivot_row[k] *= inverse;
            if (std::abs(pivot_row[k]) < 1e-15)
                pivot_row[k] = 0.0;
            else
                nonzero_.push_back(k);
        }
        pivot_row[entering] = 1.0;

        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r)
                continue;
            double* row = &cells_[i * columns_];
            const double factor = row[entering];
            if (factor == 0.0)
                continue;
            for (std::size_t k : nonzero_) {
                double v = row[k] - factor * pivot_row[k];
                row[k] = std::abs(v) < 1e-15 ? 0.0 : v;
            }
            row[entering] = 0.0;
        }
        const double factor = reduced_[entering];
        if (factor != 0.0) {
            for (std::size_t k : nonzero_)
                reduced_[k] -= factor * pivot_row[k];
        }
        reduced_[entering] = 0.0;
        head_[r] = entering;
        state_[entering] = VarState::basic;
    }

    void retire_artificials()
    {
        for (std::size_t j = structural_; j < columns_; ++j)
            upper_[j] = 0.0;
        reduced_.assign(columns_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const std::size_t h = head_[r];
            if (h < structural_)
                continue;
            std::size_t best = kNone;
            double magnitude = 1e-7;
            for (std::size_t k = 0; k < structural_; ++k) {
                if (state_[k] == VarState::basic)
                    continue;
                const double t = std::abs(at(r, k));
                if (t > magnitude) {
                    magnitude = t;
                    best = k;
                }
            }
            state_[h] = VarState::at_lower;
            if (best == kNone) {
                // Redundant row: the artificial stays basic, pinned at zero.
                state_[h] = VarState::basic;
                beta_[r] = 0.0;
                continue;
            }
            beta_[r] = state_[best] == VarState::at_upper ? upper_[best] : 0.0;
            pivot(r, best);
        }
    }

    std::vector<double> primal() const
    {
        std::vector<double> shifted(structural_, 0.0);
        for (std::size_t j = 0; j < structural_; ++j)
            if (state_[j] == VarState::at_upper)
                shifted[j] = upper_[j];
        for (std::size_t i = 0; i < rows_; ++i)
            if (head_[i] < structural_)
                shifted[head_[i]] = beta_[i];
        for (std::size_t j = 0; j < structural_; ++j)
            shifted[j] += lower_[j];
        return shifted;
    }

    SimplexOptions options_;
    std::size_t structural_;
    std::size_t rows_;
    std::size_t artificials_ = 0;
    std::size_t columns_ = 0;
    std::vector<double> cells_;
    std::vector<double> beta_;
    std::vector<std::size_t> head_;
    std::vector<double> upper_;
    std::vector<double> lower_;
    std::vector<VarState> state_;
    std::vector<double> reduced_;
    std::vector<std::size_t> nonzero_;
    double rhs_scale_ = 0.0;
    std::size_t iterations_ = 0;
    std::size_t max_iterations_ = 0;
};

} // namespace

Solution solve(const LinearProgram& program, const SimplexOptions& options)
{
    for (std::size_t j = 0; j < program.variable_count(); ++j) {
        if (program.upper(j) < program.lower(j)) {
            Solution infeasible;
            infeasible.status = Status::infeasible;
            return infeasible;
        }
    }
    Tableau tableau(program, options);
    return tableau.run(program);
}

} // namespace hems::lp
