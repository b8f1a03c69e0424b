// SPDX-License-Identifier: Apache-2.0
#include "hems/core/hems.hpp"
#include "hems/core/schedule_io.hpp"
#include "hems/synth/synth.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hems;

namespace {

ScenarioSeries flat_scenario(std::size_t steps, double dt, double t_ext, Date day = {2024, 9, 16})
{
    ScenarioSeries s;
    s.dt_hours = dt;
    for (std::size_t k = 0; k < steps; ++k) {
        s.timestamps.push_back(Instant{Instant::from(day, 0).seconds + static_cast<std::int64_t>(k * dt * 3600)});
        s.pi_e.push_back(0.2);
        s.pi_s.push_back(0.05);
        s.p_solar.push_back(0.0);
        s.p_other.push_back(0.5);
        s.t_ext.push_back(t_ext);
    }
    return s;
}

HemsParameters household(int ev_count, Date first = {2024, 9, 16}, Date last = {2024, 9, 16})
{
    HemsParameters p;
    p.date_start = first;
    p.date_end = last;
    p.city = "Oxford";
    p.ev_count = ev_count;
    p.ev_arrival_time = TimeOfDay{18 * 60};
    p.ev_departure_time = TimeOfDay{8 * 60};
    p.t_min = 18.0;
    p.t_max = 20.0;
    return p;
}

bool has_violation(const ViolationReport& report, const std::string& id)
{
    for (const auto& v : report)
        if (v.id == id)
            return true;
    return false;
}

} // namespace

TEST_CASE("thermal constants derive alpha and beta")
{
    ThermalModel model;
    CHECK(model.alpha() == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(model.beta() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(model.step(18.0, 10.0, 2.0, 0.5) - 18.3) <= 1e-12);

    ThermalModel other(4.0, 5.0, 2.0);
    CHECK(other.alpha() == doctest::Approx(0.05));
    CHECK(other.beta() == doctest::Approx(0.5));
    CHECK_THROWS_AS(ThermalModel(0.0, 10.0, 1.0), InvalidArgument);
}

TEST_CASE("simulate integrates the temperature recursion")
{
    auto params = household(0);
    params.t_min = 18.0;
    params.t_max = 21.0;
    ThermalModel thermal;
    thermal.initial_temperature = 18.0;
    auto scenario = flat_scenario(1, 0.5, 10.0);
    auto s = simulate({2.0}, {0.0}, params, thermal, EvModel{}, scenario);
    CHECK(std::abs(s.t_house[1] - 18.3) <= 1e-12);

    // Equilibrium heating keeps the temperature constant.
    const double hold = thermal.alpha() * (19.0 - 5.0) / thermal.beta();
    thermal.initial_temperature = 19.0;
    auto steady = simulate(std::vector<double>(6, hold), std::vector<double>(6, 0.0), params, thermal, EvModel{},
                           flat_scenario(6, 0.5, 5.0));
    for (double t : steady.t_house)
        CHECK(t == doctest::Approx(19.0).epsilon(1e-12));
}

TEST_CASE("time-of-day snapping rounds halves towards noon")
{
    CHECK(snap_to_slot(TimeOfDay{7 * 60 + 15}, 0.5) == 15);
    CHECK(snap_to_slot(TimeOfDay{19 * 60 + 15}, 0.5) == 38);
    CHECK(snap_to_slot(TimeOfDay{23 * 60 + 50}, 0.5) == 0);
    CHECK(snap_to_slot(TimeOfDay{8 * 60 + 10}, 0.5) == 16);
    CHECK(snap_to_slot(TimeOfDay{6 * 60 + 30}, 1.0) == 7);
    CHECK(snap_to_slot(TimeOfDay{18 * 60 + 30}, 1.0) == 18);
    CHECK_THROWS_AS(snap_to_slot(TimeOfDay{0}, 0.7), InvalidArgument);
}

TEST_CASE("occupancy wraps around midnight and splits into windows")
{
    auto scenario = flat_scenario(24, 1.0, 10.0);
    auto home = derive_occupancy(scenario.timestamps, 1.0, TimeOfDay{18 * 60}, TimeOfDay{8 * 60});
    for (std::size_t k = 0; k < 24; ++k)
        CHECK(home[k] == (k < 8 || k >= 18));
    auto windows = ev_windows(home);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].arrival == 0);
    CHECK(windows[0].departure == 8);
    CHECK(windows[0].closed);
    CHECK(windows[1].arrival == 18);
    CHECK(windows[1].departure == 24);
    CHECK_FALSE(windows[1].closed);
}

TEST_CASE("household without vehicles has no EV columns")
{
    auto params = household(0);
    auto problem = build_problem(params, ThermalModel{}, EvModel{}, flat_scenario(48, 0.5, 8.0));
    for (const auto& column : problem.ev_var)
        CHECK_FALSE(column.has_value());
    auto schedule = solve(problem);
    for (double p : schedule.p_ev)
        CHECK(p == 0.0);
    CHECK(validate(schedule, params, ThermalModel{}, EvModel{}, problem.scenario).empty());
}

TEST_CASE("EV energy arithmetic decides window feasibility")
{
    EvModel ev;
    CHECK(ev.full_energy(1) == doctest::Approx(40.0));
    CHECK(ev.full_energy(1) - ev.initial_energy(1) == doctest::Approx(32.0));
    CHECK(ev.max_power(2) == doctest::Approx(14.0));

    // 18:00 to 08:00 next day: 14 h x 7 kW = 98 kWh >= 32 kWh.
    auto params = household(1, {2024, 9, 16}, {2024, 9, 17});
    auto scenario = flat_scenario(96, 0.5, 9.0);
    CHECK_NOTHROW(check_feasibility(params, ThermalModel{}, ev, scenario));

    // 18:00 to 20:00 is 14 kWh, short of 32 kWh.
    params.ev_departure_time = TimeOfDay{20 * 60};
    try {
        check_feasibility(params, ThermalModel{}, ev, scenario);
        FAIL("expected an infeasible EV window");
    } catch (const InfeasibleError& e) {
        CHECK(e.constraint_class() == ConstraintClass::ev_boundary);
        CHECK(e.code() == ErrorCode::infeasible);
        CHECK(std::string(e.what()).find("32 kWh needed") != std::string::npos);
        CHECK(e.step() == 36);
    }
    CHECK_THROWS_AS(build_problem(params, ThermalModel{}, ev, scenario), InfeasibleError);
}

TEST_CASE("temperature band infeasibility is classified")
{
    auto params = household(0);
    params.t_min = 25.0;
    params.t_max = 27.0;
    try {
        build_problem(params, ThermalModel{}, EvModel{}, flat_scenario(48, 0.5, -30.0));
        FAIL("expected infeasible temperature band");
    } catch (const InfeasibleError& e) {
        CHECK(e.constraint_class() == ConstraintClass::temperature);
    }

    auto hot = household(0);
    ThermalModel thermal;
    thermal.initial_temperature = 20.0;
    try {
        build_problem(hot, thermal, EvModel{}, flat_scenario(48, 0.5, 45.0));
        FAIL("expected infeasible temperature band");
    } catch (const InfeasibleError& e) {
        CHECK(e.constraint_class() == ConstraintClass::temperature);
        CHECK(std::string(e.what()).find("below t_max") != std::string::npos);
    }

    // Without the pre-check the LP itself reports infeasibility and the
    // classification still names the temperature band.
    BuildOptions raw;
    raw.check_feasibility = false;
    auto problem = build_problem(params, ThermalModel{}, EvModel{}, flat_scenario(8, 0.5, -30.0), raw);
    try {
        solve(problem);
        FAIL("expected infeasible program");
    } catch (const InfeasibleError& e) {
        CHECK(e.constraint_class() == ConstraintClass::temperature);
    }
}

TEST_CASE("inputs outside the contract are rejected")
{
    auto params = household(0);
    auto scenario = flat_scenario(4, 0.5, 10.0);
    scenario.pi_s[2] = 0.5;
    CHECK_THROWS_AS(build_problem(params, ThermalModel{}, EvModel{}, scenario), InvalidArgument);

    params.t_min = 21.0;
    CHECK_THROWS_AS(build_problem(params, ThermalModel{}, EvModel{}, flat_scenario(4, 0.5, 10.0)), InvalidArgument);

    auto late = household(0, {2024, 9, 17}, {2024, 9, 18});
    CHECK_THROWS_AS(build_problem(late, ThermalModel{}, EvModel{}, flat_scenario(4, 0.5, 10.0)), InvalidArgument);

    auto short_series = flat_scenario(4, 0.5, 10.0);
    short_series.t_ext.pop_back();
    CHECK_THROWS_AS(build_problem(household(0), ThermalModel{}, EvModel{}, short_series), InvalidArgument);
}

TEST_CASE("validate flags exactly the constraint that is broken")
{
    auto params = household(0);
    ThermalModel thermal;
    auto scenario = flat_scenario(12, 0.5, 0.0);
    const double dt = scenario.dt_hours;

    // Ramp to 20.5 °C with feasible heater powers, drop back, then hold.
    std::vector<double> heat;
    double t = params.t_min;
    bool overshoot = false;
    for (std::size_t k = 0; k < scenario.size(); ++k) {
        double target;
        if (!overshoot)
            target = std::min(t + 0.5, params.t_max + 0.5);
        else
            target = 19.5;
        double p = (target - t - dt * thermal.alpha() * (scenario.t_ext[k] - t)) / (dt * thermal.beta());
        if (overshoot && t > params.t_max)
            p = 0.0;
        p = std::clamp(p, 0.0, thermal.heater_rating_kw());
        heat.push_back(p);
        t = thermal.step(t, scenario.t_ext[k], p, dt);
        if (t >= params.t_max + 0.5 - 1e-12)
            overshoot = true;
    }
    auto s = simulate(heat, std::vector<double>(heat.size(), 0.0), params, thermal, EvModel{}, scenario);
    auto report = validate(s, params, thermal, EvModel{}, scenario);
    REQUIRE(report.size() == 1);
    CHECK(report[0].id == "temp_upper");
    CHECK(report[0].magnitude == doctest::Approx(0.5).epsilon(1e-9));

    // A cost that disagrees with the power flows is caught too.
    auto tampered = s;
    tampered.total_cost += 1.0;
    CHECK(has_violation(validate(tampered, params, thermal, EvModel{}, scenario), "cost"));
}

TEST_CASE("validate catches an uncharged vehicle and a missing arrival reset")
{
    auto params = household(1, {2024, 9, 16}, {2024, 9, 18});
    ThermalModel thermal;
    EvModel ev;
    auto scenario = flat_scenario(144, 0.5, 8.0);
    auto problem = build_problem(params, thermal, ev, scenario);
    auto schedule = solve(problem);
    CHECK(validate(schedule, params, thermal, ev, scenario).empty());

    // Every arrival restarts from the initial charge.
    for (const auto& w : problem.windows)
        CHECK(schedule.e_ev[w.arrival] == doctest::Approx(ev.initial_energy(1)));
    for (const auto& w : problem.windows)
        if (w.closed)
            CHECK(schedule.e_ev[w.departure] == doctest::Approx(ev.full_energy(1)).epsilon(1e-9));

    auto idle = simulate(schedule.p_heat, std::vector<double>(scenario.size(), 0.0), params, thermal, ev, scenario);
    CHECK(has_violation(validate(idle, params, thermal, ev, scenario), "ev_end"));

    auto no_reset = schedule;
    no_reset.e_ev[problem.windows[1].arrival] = ev.full_energy(1);
    CHECK(has_violation(validate(no_reset, params, thermal, ev, scenario), "ev_start"));

    auto away = schedule;
    std::size_t k = 0;
    while (problem.occupancy[k])
        ++k;
    away.p_ev[k] = 1.0;
    CHECK(has_violation(validate(away, params, thermal, ev, scenario), "ev_away"));
}

TEST_CASE("solver output equals simulated dynamics")
{
    auto params = household(2, {2024, 1, 8}, {2024, 1, 9});
    ThermalModel thermal;
    EvModel ev;
    auto scenario = synth::make_scenario("Oxford", params.date_start, params.date_end, 0.5, 7);
    auto problem = build_problem(params, thermal, ev, scenario);
    auto result = solve_with_details(problem);
    auto replay = simulate(result.schedule.p_heat, result.schedule.p_ev, params, thermal, ev, scenario);
    CHECK(replay.t_house == result.schedule.t_house);
    CHECK(replay.e_ev == result.schedule.e_ev);
    CHECK(replay.total_cost == result.schedule.total_cost);
    CHECK(result.solution.objective == doctest::Approx(result.schedule.total_cost).epsilon(1e-9));
    CHECK(validate(result.schedule, params, thermal, ev, scenario).empty());
}

TEST_CASE("scaling prices by a power of two scales the cost only")
{
    auto params = household(1, {2024, 3, 4}, {2024, 3, 5});
    auto scenario = synth::make_scenario("Leeds", params.date_start, params.date_end, 0.5, 3);
    auto base = solve(build_problem(params, ThermalModel{}, EvModel{}, scenario));
    auto doubled_scenario = scenario;
    for (auto& p : doubled_scenario.pi_e)
        p *= 2.0;
    for (auto& p : doubled_scenario.pi_s)
        p *= 2.0;
    auto doubled = solve(build_problem(params, ThermalModel{}, EvModel{}, doubled_scenario));
    CHECK(doubled.p_heat == base.p_heat);
    CHECK(doubled.p_ev == base.p_ev);
    CHECK(doubled.total_cost == doctest::Approx(2.0 * base.total_cost).epsilon(1e-12));
}

TEST_CASE("optimized schedule never costs more than the naive policy")
{
    auto params = household(1, {2024, 11, 4}, {2024, 11, 6});
    ThermalModel thermal;
    EvModel ev;
    auto scenario = synth::make_scenario("Manchester", params.date_start, params.date_end, 0.5, 11);
    auto naive = naive_schedule(params, thermal, ev, scenario);
    CHECK(validate(naive, params, thermal, ev, scenario).empty());
    auto optimized = solve(build_problem(params, thermal, ev, scenario));
    CHECK(optimized.total_cost < naive.total_cost);
}

TEST_CASE("LP cost matches exhaustive grid search on small instances")
{
    int checked = 0;
    for (std::uint64_t seed = 1; checked < 12 && seed < 200; ++seed) {
        auto instance = testing::random_oracle_instance(seed);
        try {
            check_feasibility(instance.params, instance.thermal, instance.ev, instance.scenario);
        } catch (const InfeasibleError&) {
            continue;
        }
        auto oracle = testing::exhaustive_grid_search(instance);
        if (!oracle.feasible)
            continue;
        auto schedule = solve(build_problem(instance.params, instance.thermal, instance.ev, instance.scenario));
        CAPTURE(seed);
        CHECK(schedule.total_cost <= oracle.cost + 1e-9);
        CHECK(oracle.cost - schedule.total_cost <= testing::grid_resolution_bound(instance));
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("grid search agrees exactly when the optimum lies on the grid")
{
    // 6 steps of 1 h, two price levels, one EV needing 4 kWh at up to 2 kW,
    // outdoor temperature at t_min so heating is never needed.
    testing::OracleInstance in;
    in.params = household(1);
    in.params.ev_arrival_time = TimeOfDay{60};
    in.params.ev_departure_time = TimeOfDay{5 * 60};
    in.scenario = flat_scenario(6, 1.0, in.params.t_min);
    in.scenario.pi_e = {0.30, 0.30, 0.30, 0.10, 0.10, 0.10};
    in.ev.battery_capacity_per_vehicle = 5.0;
    in.ev.e_init_fraction = 0.2;
    in.ev.p_charge_max_per_vehicle = 2.0;
    in.heat_levels = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    in.ev_levels = {0.0, 0.5, 1.0, 1.5, 2.0};
    auto oracle = testing::exhaustive_grid_search(in);
    REQUIRE(oracle.feasible);
    auto schedule = solve(build_problem(in.params, in.thermal, in.ev, in.scenario));
    CHECK(schedule.total_cost == doctest::Approx(oracle.cost).epsilon(1e-12));
    // Baseline 0.5 kW for 6 h plus 2 x 2 kWh in the cheap home steps.
    CHECK(oracle.cost == doctest::Approx(0.5 * (3 * 0.30 + 3 * 0.10) + 4.0 * 0.10));
    CHECK(schedule.p_ev[3] == doctest::Approx(2.0));
    CHECK(schedule.p_ev[4] == doctest::Approx(2.0));
}

TEST_CASE("degenerate tariffs keep the naive policy dominated")
{
    auto params = household(0);
    params.t_max = 20.0;
    auto equilibrium = flat_scenario(48, 0.5, params.t_max);
    ThermalModel thermal;
    thermal.initial_temperature = params.t_max;
    auto naive = naive_schedule(params, thermal, EvModel{}, equilibrium);
    double baseline = 0.0;
    for (std::size_t k = 0; k < equilibrium.size(); ++k)
        baseline += equilibrium.p_other[k] * equilibrium.pi_e[k] * equilibrium.dt_hours;
    CHECK(naive.total_cost == doctest::Approx(baseline).epsilon(1e-12));

    auto free_power = flat_scenario(48, 0.5, 8.0);
    for (std::size_t k = 0; k < free_power.size(); ++k) {
        free_power.pi_e[k] = 0.0;
        free_power.pi_s[k] = 0.0;
        free_power.p_solar[k] = k % 3 == 0 ? 2.0 : 0.0;
    }
    auto optimized = solve(build_problem(params, ThermalModel{}, EvModel{}, free_power));
    auto naive_free = naive_schedule(params, ThermalModel{}, EvModel{}, free_power);
    CHECK(optimized.total_cost == doctest::Approx(0.0));
    CHECK(optimized.total_cost <= naive_free.total_cost + 1e-9);
}

TEST_CASE("schedule CSV has one row per step and a cost trailer")
{
    auto params = household(0);
    auto scenario = flat_scenario(48, 0.5, 10.0);
    auto schedule = solve(build_problem(params, ThermalModel{}, EvModel{}, scenario));
    std::ostringstream out;
    write_schedule_csv(out, schedule);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    CHECK(rows == 50);
    CHECK(last.rfind("total_cost,", 0) == 0);
}

TEST_CASE("slicing keeps only the requested dates")
{
    auto scenario = flat_scenario(96, 0.5, 10.0);
    auto day = slice_to_dates(scenario, {2024, 9, 17}, {2024, 9, 17});
    CHECK(day.size() == 48);
    CHECK(day.timestamps.front().iso() == "2024-09-17T00:00:00");
}
