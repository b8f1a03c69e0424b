// SPDX-License-Identifier: Apache-2.0
#include "hems/core/hems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hems {

namespace {

constexpr double kCheckTolerance = 1e-9;

int slots_per_day(double dt_hours)
{
    const double slots = 24.0 / dt_hours;
    const auto rounded = std::lround(slots);
    if (rounded < 1 || std::abs(slots - static_cast<double>(rounded)) > 1e-9)
        throw InvalidArgument("dt must divide a day into a whole number of steps");
    return static_cast<int>(rounded);
}

std::string number(double value)
{
    std::ostringstream out;
    out << value;
    return out.str();
}

void check_dates(const HemsParameters& params, const ScenarioSeries& scenario)
{
    for (std::size_t k = 0; k < scenario.size(); ++k) {
        const Date day = scenario.timestamps[k].date();
        if (day < params.date_start || params.date_end < day)
            throw InvalidArgument("scenario step " + std::to_string(k) + " (" + scenario.timestamps[k].iso() +
                                  ") lies outside the simulation dates");
    }
}

void check_temperature(const HemsParameters& params, const ThermalModel& thermal, const ScenarioSeries& scenario,
                       double initial)
{
    double lo = initial;
    double hi = initial;
    const double dt = scenario.dt_hours;
    const double rating = thermal.heater_rating_kw();
    for (std::size_t k = 0; k < scenario.size(); ++k) {
        const double a = thermal.step(lo, scenario.t_ext[k], 0.0, dt);
        const double b = thermal.step(hi, scenario.t_ext[k], 0.0, dt);
        const double c = thermal.step(lo, scenario.t_ext[k], rating, dt);
        const double d = thermal.step(hi, scenario.t_ext[k], rating, dt);
        lo = std::max(std::min(a, b), params.t_min);
        hi = std::min(std::max(c, d), params.t_max);
        if (lo > hi + kCheckTolerance) {
            const bool too_cold = std::max(c, d) < params.t_min;
            throw InfeasibleError(ConstraintClass::temperature, k,
                                  std::string("house temperature cannot stay ") +
                                      (too_cold ? "above t_min" : "below t_max") + " after step " + std::to_string(k) +
                                      " (outdoor " + number(scenario.t_ext[k]) + " °C, heater " + number(rating) +
                                      " kW)");
        }
        hi = std::max(hi, lo);
    }
}

double initial_temperature(const HemsParameters& params, const ThermalModel& thermal)
{
    return thermal.initial_temperature.value_or(params.t_min);
}

std::vector<bool> occupancy_for(const HemsParameters& params, const ScenarioSeries& scenario)
{
    if (params.ev_count == 0)
        return std::vector<bool>(scenario.size(), false);
    return derive_occupancy(scenario.timestamps, scenario.dt_hours, params.ev_arrival_time, params.ev_departure_time);
}

void validate_inputs(const HemsParameters& params, const EvModel& ev, const ScenarioSeries& scenario)
{
    params.validate();
    ev.validate();
    scenario.validate();
    check_dates(params, scenario);
}

} // namespace

std::string_view to_string(ConstraintClass cls)
{
    switch (cls) {
    case ConstraintClass::ev_boundary: return "ev_boundary";
    case ConstraintClass::temperature: return "temperature";
    case ConstraintClass::bounds: return "bounds";
    }
    return "unknown";
}

int snap_to_slot(TimeOfDay time, double dt_hours)
{
    const int slots = slots_per_day(dt_hours);
    const double slot_minutes = dt_hours * 60.0;
    const double position = time.minutes / slot_minutes;
    const double floor = std::floor(position);
    const double fraction = position - floor;
    int slot = static_cast<int>(floor);
    if (std::abs(fraction - 0.5) < 1e-9) {
        if (time.minutes < 720)
            ++slot;
    } else if (fraction > 0.5) {
        ++slot;
    }
    return slot % slots;
}

std::vector<bool> derive_occupancy(const std::vector<Instant>& timestamps, double dt_hours, TimeOfDay arrival,
                                   TimeOfDay departure)
{
    const int slots = slots_per_day(dt_hours);
    const int a = snap_to_slot(arrival, dt_hours);
    const int d = snap_to_slot(departure, dt_hours);
    if (a == d)
        throw InvalidArgument("arrival and departure snap to the same time step");
    const double step_seconds = dt_hours * 3600.0;

    std::vector<bool> home(timestamps.size(), false);
    for (std::size_t k = 0; k < timestamps.size(); ++k) {
        const int slot = static_cast<int>(std::floor(timestamps[k].second_of_day() / step_seconds + 1e-9)) % slots;
        home[k] = a < d ? (slot >= a && slot < d) : (slot >= a || slot < d);
    }
    return home;
}

std::vector<EvWindow> ev_windows(const std::vector<bool>& occupancy)
{
    std::vector<EvWindow> windows;
    const std::size_t n = occupancy.size();
    std::size_t k = 0;
    while (k < n) {
        if (!occupancy[k]) {
            ++k;
            continue;
        }
        EvWindow window;
        window.arrival = k;
        while (k < n && occupancy[k])
            ++k;
        window.departure = k;
        window.closed = k < n;
        windows.push_back(window);
    }
    return windows;
}

void check_feasibility(const HemsParameters& params, const ThermalModel& thermal, const EvModel& ev,
                       const ScenarioSeries& scenario)
{
    const auto occupancy = occupancy_for(params, scenario);
    const auto windows = ev_windows(occupancy);
    const double needed = ev.full_energy(params.ev_count) - ev.initial_energy(params.ev_count);
    for (const auto& window : windows) {
        if (!window.closed)
            continue;
        const double hours = static_cast<double>(window.departure - window.arrival) * scenario.dt_hours;
        const double deliverable = hours * ev.max_power(params.ev_count);
        if (needed > deliverable + kCheckTolerance)
            throw InfeasibleError(ConstraintClass::ev_boundary, window.arrival,
                                  "vehicles cannot reach full charge: " + number(needed) + " kWh needed but only " +
                                      number(deliverable) + " kWh deliverable in " + number(hours) +
                                      " h between steps " + std::to_string(window.arrival) + " and " +
                                      std::to_string(window.departure));
    }
    check_temperature(params, thermal, scenario, initial_temperature(params, thermal));
}

OptimizationProblem build_problem(const HemsParameters& params, const ThermalModel& thermal, const EvModel& ev,
                                  const ScenarioSeries& scenario, const BuildOptions& options)
{
    validate_inputs(params, ev, scenario);
    if (options.check_feasibility)
        check_feasibility(params, thermal, ev, scenario);

    OptimizationProblem problem;
    problem.params = params;
    problem.thermal = thermal;
    problem.ev = ev;
    problem.scenario = scenario;
    problem.occupancy = occupancy_for(params, scenario);
    problem.windows = ev_windows(problem.occupancy);
    problem.initial_temperature = initial_temperature(params, thermal);

    const std::size_t n = scenario.size();
    const double dt = scenario.dt_hours;
    const double alpha = thermal.alpha();
    const double beta = thermal.beta();
    auto& lp = problem.program;

    problem.heat_var.resize(n);
    problem.temp_var.resize(n);
    problem.import_var.resize(n);
    problem.export_var.resize(n);
    problem.ev_var.assign(n, std::nullopt);

    for (std::size_t k = 0; k < n; ++k) {
        const std::string suffix = "[" + std::to_string(k) + "]";
        problem.heat_var[k] = lp.add_variable(0.0, 0.0, thermal.heater_rating_kw(), "p_heat" + suffix);
        problem.temp_var[k] = lp.add_variable(0.0, params.t_min, params.t_max, "t_house" + suffix);
        problem.import_var[k] = lp.add_variable(scenario.pi_e[k] * dt, 0.0, lp::kInfinity, "grid_import" + suffix);
        problem.export_var[k] = lp.add_variable(-scenario.pi_s[k] * dt, 0.0, lp::kInfinity, "grid_export" + suffix);
        if (problem.has_ev() && problem.occupancy[k])
            problem.ev_var[k] = lp.add_variable(0.0, 0.0, ev.max_power(params.ev_count), "p_ev" + suffix);
    }

    for (std::size_t k = 0; k < n; ++k) {
        // grid_import - grid_export - p_heat - p_ev = p_other - p_solar
        std::vector<lp::Term> balance = {
            {problem.import_var[k], 1.0}, {problem.export_var[k], -1.0}, {problem.heat_var[k], -1.0}};
        if (problem.ev_var[k])
            balance.push_back({*problem.ev_var[k], -1.0});
        lp.add_row(std::move(balance), scenario.p_other[k] - scenario.p_solar[k], "balance[" + std::to_string(k) + "]");
    }

    for (std::size_t k = 0; k < n; ++k) {
        // T[k+1] - (1 - alpha dt) T[k] - dt beta p_heat[k] = dt alpha T_ext[k]
        const double keep = 1.0 - alpha * dt;
        std::vector<lp::Term> row = {{problem.temp_var[k], 1.0}, {problem.heat_var[k], -dt * beta}};
        double rhs = dt * alpha * scenario.t_ext[k];
        if (k == 0)
            rhs += keep * problem.initial_temperature;
        else
            row.push_back({problem.temp_var[k - 1], -keep});
        lp.add_row(std::move(row), rhs, "temperature[" + std::to_string(k) + "]");
    }

    if (problem.has_ev()) {
        const double needed = ev.full_energy(params.ev_count) - ev.initial_energy(params.ev_count);
        for (const auto& window : problem.windows) {
            std::vector<lp::Term> energy;
            for (std::size_t k = window.arrival; k < window.departure; ++k)
                energy.push_back({*problem.ev_var[k], dt});
            const std::string name = "ev_window[" + std::to_string(window.arrival) + "]";
            if (!window.closed) {
                // Open window: the battery only has to stay within capacity.
                energy.push_back({lp.add_variable(0.0, 0.0, lp::kInfinity, name + ".slack"), 1.0});
            }
            lp.add_row(std::move(energy), needed, name);
        }
    }
    return problem;
}

SolveResult solve_with_details(const OptimizationProblem& problem, double tolerance)
{
    lp::SimplexOptions options;
    options.feasibility_tolerance = std::min(1e-9, tolerance);
    auto solution = lp::solve(problem.program, options);

    if (solution.status == lp::Status::infeasible) {
        check_feasibility(problem.params, problem.thermal, problem.ev, problem.scenario);
        throw InfeasibleError(ConstraintClass::bounds, 0,
                              "no schedule satisfies the variable bounds (phase-one residual " +
                                  number(solution.phase_one_residual) + ")");
    }
    if (solution.status != lp::Status::optimal)
        throw std::runtime_error("LP solver stopped: " + lp::to_string(solution.status));

    const std::size_t n = problem.scenario.size();
    const double rating = problem.thermal.heater_rating_kw();
    const double ev_cap = problem.ev.max_power(problem.params.ev_count);
    std::vector<double> p_heat(n, 0.0);
    std::vector<double> p_ev(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        p_heat[k] = std::clamp(solution.x[problem.heat_var[k]], 0.0, rating);
        if (problem.ev_var[k])
            p_ev[k] = std::clamp(solution.x[*problem.ev_var[k]], 0.0, ev_cap);
    }
    SolveResult result;
    result.schedule =
        simulate(p_heat, p_ev, problem.params, problem.thermal, problem.ev, problem.scenario);
    result.solution = std::move(solution);
    return result;
}

Schedule solve(const OptimizationProblem& problem, double tolerance)
{
    return solve_with_details(problem, tolerance).schedule;
}

Schedule simulate(const std::vector<double>& p_heat, const std::vector<double>& p_ev, const HemsParameters& params,
                  const ThermalModel& thermal, const EvModel& ev, const ScenarioSeries& scenario)
{
    const std::size_t n = scenario.size();
    if (p_heat.size() != n || p_ev.size() != n)
        throw InvalidArgument("decision series length does not match the scenario");
    const double dt = scenario.dt_hours;

    Schedule s;
    s.dt_hours = dt;
    s.timestamps = scenario.timestamps;
    s.occupancy = occupancy_for(params, scenario);
    s.p_heat = p_heat;
    s.p_ev = p_ev;
    s.p_other = scenario.p_other;
    s.p_solar = scenario.p_solar;
    s.pi_e = scenario.pi_e;
    s.pi_s = scenario.pi_s;
    s.t_ext = scenario.t_ext;
    s.p_total.resize(n);
    s.grid_import.resize(n);
    s.grid_export.resize(n);
    s.t_house.resize(n + 1);
    s.e_ev.resize(n + 1);

    const double e_init = ev.initial_energy(params.ev_count);
    s.t_house[0] = initial_temperature(params, thermal);
    s.e_ev[0] = e_init;
    double cost = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        s.t_house[k + 1] = thermal.step(s.t_house[k], scenario.t_ext[k], p_heat[k], dt);

        if (s.occupancy[k] && (k == 0 || !s.occupancy[k - 1]))
            s.e_ev[k] = e_init;
        s.e_ev[k + 1] = s.e_ev[k] + p_ev[k] * dt;

        s.p_total[k] = p_heat[k] + p_ev[k] + scenario.p_other[k];
        const double net = s.p_total[k] - scenario.p_solar[k];
        s.grid_import[k] = net >= 0.0 ? net : 0.0;
        s.grid_export[k] = net >= 0.0 ? 0.0 : -net;
        const double price = net >= 0.0 ? scenario.pi_e[k] : scenario.pi_s[k];
        cost += net * price * dt;
    }
    s.total_cost = cost;
    return s;
}

ViolationReport validate(const Schedule& s, const HemsParameters& params, const ThermalModel& thermal,
                         const EvModel& ev, const ScenarioSeries& scenario, double tolerance)
{
    ViolationReport report;
    const std::size_t n = scenario.size();
    if (s.p_heat.size() != n || s.p_ev.size() != n || s.p_total.size() != n || s.grid_import.size() != n ||
        s.grid_export.size() != n || s.t_house.size() != n + 1 || s.e_ev.size() != n + 1) {
        report.push_back({0, "length", 1.0});
        return report;
    }
    auto flag = [&](std::size_t step, const char* id, double excess, double scale) {
        if (excess > tolerance * std::max(1.0, std::abs(scale)))
            report.push_back({step, id, excess});
    };

    const double dt = scenario.dt_hours;
    const auto occupancy = occupancy_for(params, scenario);
    const double e_full = ev.full_energy(params.ev_count);
    const double e_init = ev.initial_energy(params.ev_count);
    const double ev_cap = ev.max_power(params.ev_count);
    const double rating = thermal.heater_rating_kw();

    flag(0, "temp_initial", std::abs(s.t_house[0] - initial_temperature(params, thermal)), s.t_house[0]);
    double cost = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double total = s.p_heat[k] + s.p_ev[k] + scenario.p_other[k];
        flag(k, "total_power", std::abs(s.p_total[k] - total), total);
        const double net = s.p_total[k] - scenario.p_solar[k];
        flag(k, "power_balance", std::abs(s.grid_import[k] - s.grid_export[k] - net), net);
        flag(k, "import_lower", -s.grid_import[k], 0.0);
        flag(k, "export_lower", -s.grid_export[k], 0.0);
        cost += (scenario.pi_e[k] * s.grid_import[k] - scenario.pi_s[k] * s.grid_export[k]) * dt;

        flag(k, "heat_lower", -s.p_heat[k], 0.0);
        flag(k, "heat_upper", s.p_heat[k] - rating, rating);
        flag(k, "ev_lower", -s.p_ev[k], 0.0);
        flag(k, "ev_upper", s.p_ev[k] - ev_cap, ev_cap);
        if (!occupancy[k])
            flag(k, "ev_away", std::abs(s.p_ev[k]), 0.0);

        const double expected_t = thermal.step(s.t_house[k], scenario.t_ext[k], s.p_heat[k], dt);
        flag(k + 1, "temp_dynamics", std::abs(s.t_house[k + 1] - expected_t), expected_t);
        flag(k + 1, "temp_lower", params.t_min - s.t_house[k + 1], params.t_min);
        flag(k + 1, "temp_upper", s.t_house[k + 1] - params.t_max, params.t_max);

        const bool arrival = occupancy[k] && (k == 0 || !occupancy[k - 1]);
        if (arrival)
            flag(k, "ev_start", std::abs(s.e_ev[k] - e_init), e_init);
        const bool next_arrival = k + 1 < n && occupancy[k + 1] && !occupancy[k];
        if (!next_arrival) {
            const double expected_e = s.e_ev[k] + s.p_ev[k] * dt;
            flag(k + 1, "ev_dynamics", std::abs(s.e_ev[k + 1] - expected_e), expected_e);
        }
        if (params.ev_count > 0) {
            flag(k + 1, "ev_capacity", s.e_ev[k + 1] - e_full, e_full);
            const bool departure = occupancy[k] && (k + 1 < n && !occupancy[k + 1]);
            if (departure)
                flag(k + 1, "ev_end", e_full - s.e_ev[k + 1], e_full);
        }
    }
    flag(n, "cost", std::abs(s.total_cost - cost), cost);
    return report;
}

Schedule naive_schedule(const HemsParameters& params, const ThermalModel& thermal, const EvModel& ev,
                        const ScenarioSeries& scenario)
{
    validate_inputs(params, ev, scenario);
    check_feasibility(params, thermal, ev, scenario);

    const std::size_t n = scenario.size();
    const double dt = scenario.dt_hours;
    const double alpha = thermal.alpha();
    const double beta = thermal.beta();
    const double rating = thermal.heater_rating_kw();
    const auto occupancy = occupancy_for(params, scenario);
    const double e_full = ev.full_energy(params.ev_count);
    const double e_init = ev.initial_energy(params.ev_count);
    const double ev_cap = ev.max_power(params.ev_count);

    std::vector<double> p_heat(n, 0.0);
    std::vector<double> p_ev(n, 0.0);
    double t = initial_temperature(params, thermal);
    double e = e_init;
    for (std::size_t k = 0; k < n; ++k) {
        const double wanted = (params.t_max - t - dt * alpha * (scenario.t_ext[k] - t)) / (dt * beta);
        p_heat[k] = std::clamp(wanted, 0.0, rating);
        t = thermal.step(t, scenario.t_ext[k], p_heat[k], dt);

        if (occupancy[k]) {
            if (k == 0 || !occupancy[k - 1])
                e = e_init;
            p_ev[k] = std::clamp((e_full - e) / dt, 0.0, ev_cap);
            e += p_ev[k] * dt;
        }
    }
    return simulate(p_heat, p_ev, params, thermal, ev, scenario);
}

ScenarioSeries slice_to_dates(const ScenarioSeries& scenario, Date start, Date end)
{
    ScenarioSeries out;
    out.dt_hours = scenario.dt_hours;
    for (std::size_t k = 0; k < scenario.size(); ++k) {
        const Date day = scenario.timestamps[k].date();
        if (day < start || end < day)
            continue;
        out.timestamps.push_back(scenario.timestamps[k]);
        out.pi_e.push_back(scenario.pi_e[k]);
        out.pi_s.push_back(scenario.pi_s[k]);
        out.p_solar.push_back(scenario.p_solar[k]);
        out.p_other.push_back(scenario.p_other[k]);
        out.t_ext.push_back(scenario.t_ext[k]);
    }
    return out;
}

} // namespace hems
