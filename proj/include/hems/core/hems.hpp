// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/core/lp.hpp"
#include "hems/core/types.hpp"
#include "hems/error.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hems {

enum class ConstraintClass { ev_boundary, temperature, bounds };

std::string_view to_string(ConstraintClass cls);

class InfeasibleError : public Error {
public:
    InfeasibleError(ConstraintClass cls, std::size_t step, const std::string& message)
        : Error(ErrorCode::infeasible, std::string(to_string(cls)) + ": " + message), class_(cls), step_(step) {}

    ConstraintClass constraint_class() const noexcept { return class_; }
    std::size_t step() const noexcept { return step_; }

private:
    ConstraintClass class_;
    std::size_t step_;
};

/// A stay of the vehicle(s) at home, as step-boundary indices.
/// arrival == 0 also covers a horizon that starts while the car is home;
/// an open window runs into the end of the horizon without a departure.
struct EvWindow {
    std::size_t arrival = 0;
    std::size_t departure = 0;
    bool closed = true;
};

/// Snap a time of day to a step boundary of a grid aligned to midnight.
/// Exact halves round away from midnight (towards noon).
int snap_to_slot(TimeOfDay time, double dt_hours);

/// Per-step home flag: the vehicles are present in the cyclic daily
/// interval [arrival, departure) after both ends are snapped to the grid.
std::vector<bool> derive_occupancy(const std::vector<Instant>& timestamps, double dt_hours, TimeOfDay arrival,
                                   TimeOfDay departure);

std::vector<EvWindow> ev_windows(const std::vector<bool>& occupancy);

/// The LP of the scheduling problem plus the column map needed to read a
/// schedule back from its solution.
struct OptimizationProblem {
    HemsParameters params;
    ThermalModel thermal;
    EvModel ev;
    ScenarioSeries scenario;
    std::vector<bool> occupancy;
    std::vector<EvWindow> windows;
    double initial_temperature = 0.0;

    lp::LinearProgram program;
    std::vector<std::size_t> heat_var;
    std::vector<std::size_t> temp_var; ///< boundary k+1 for step k
    std::vector<std::size_t> import_var;
    std::vector<std::size_t> export_var;
    std::vector<std::optional<std::size_t>> ev_var; ///< empty optional while away

    bool has_ev() const { return params.ev_count > 0; }
};

struct BuildOptions {
    /// Run the EV-window and temperature reachability checks up front.
    bool check_feasibility = true;
};

/// Throws InvalidArgument for inconsistent inputs (including feed-in above
/// import price) and InfeasibleError when a check fails.
OptimizationProblem build_problem(const HemsParameters& params, const ThermalModel& thermal, const EvModel& ev,
                                  const ScenarioSeries& scenario, const BuildOptions& options = {});

/// Throws InfeasibleError for the first failing constraint class, if any.
void check_feasibility(const HemsParameters& params, const ThermalModel& thermal, const EvModel& ev,
                       const ScenarioSeries& scenario);

struct SolveResult {
    Schedule schedule;
    lp::Solution solution;
};

SolveResult solve_with_details(const OptimizationProblem& problem, double tolerance = 1e-6);

/// Cost-minimal schedule. Decisions come from the LP; the state
/// trajectories and cost are produced by `simulate` on those decisions.
Schedule solve(const OptimizationProblem& problem, double tolerance = 1e-6);

/// Forward-integrates temperature and battery energy for given decisions.
/// Never fails on constraint violations; see `validate`.
Schedule simulate(const std::vector<double>& p_heat, const std::vector<double>& p_ev, const HemsParameters& params,
                  const ThermalModel& thermal, const EvModel& ev, const ScenarioSeries& scenario);

struct Violation {
    std::size_t step;
    std::string id;
    double magnitude;
};

using ViolationReport = std::vector<Violation>;

/// Lists every constraint violated by more than tolerance·max(1, |scale|).
ViolationReport validate(const Schedule& schedule, const HemsParameters& params, const ThermalModel& thermal,
                         const EvModel& ev, const ScenarioSeries& scenario, double tolerance = 1e-6);

/// Price-blind reference policy: thermostat at t_max within the heater
/// rating, vehicles charged at full power from arrival until full.
Schedule naive_schedule(const HemsParameters& params, const ThermalModel& thermal, const EvModel& ev,
                        const ScenarioSeries& scenario);

/// Restrict a scenario to the steps inside [date_start, date_end].
ScenarioSeries slice_to_dates(const ScenarioSeries& scenario, Date start, Date end);

} // namespace hems
