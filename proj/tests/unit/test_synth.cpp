// SPDX-License-Identifier: Apache-2.0
#include "hems/core/hems.hpp"
#include "hems/synth/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace hems;

TEST_CASE("economy 7 window covers seven hours at half-hour steps")
{
    auto stamps = synth::make_timestamps({2024, 9, 16}, {2024, 9, 16}, 0.5);
    REQUIRE(stamps.size() == 48);
    synth::TariffSpec spec;
    auto prices = synth::economy7_prices(spec, stamps);
    CHECK(std::count(prices.pi_e.begin(), prices.pi_e.end(), spec.offpeak_price) == 14);
    CHECK(prices.pi_e[0] == spec.peak_price);
    CHECK(prices.pi_e[1] == spec.offpeak_price);
    CHECK(prices.pi_e[14] == spec.offpeak_price);
    CHECK(prices.pi_e[15] == spec.peak_price);
    for (double s : prices.pi_s)
        CHECK(s == spec.feedin_price);
}

TEST_CASE("tariff variants")
{
    auto stamps = synth::make_timestamps({2024, 9, 16}, {2024, 9, 17}, 1.0);
    synth::TariffSpec flat;
    flat.offpeak_price = flat.peak_price = 0.2;
    auto prices = synth::economy7_prices(flat, stamps);
    CHECK(std::all_of(prices.pi_e.begin(), prices.pi_e.end(), [](double p) { return p == 0.2; }));

    synth::TariffSpec night;
    night.offpeak_start = TimeOfDay{22 * 60};
    night.offpeak_end = TimeOfDay{5 * 60};
    auto wrapped = synth::economy7_prices(night, stamps);
    CHECK(std::count(wrapped.pi_e.begin(), wrapped.pi_e.end(), night.offpeak_price) == 14);
    CHECK(wrapped.pi_e[23] == night.offpeak_price);
    CHECK(wrapped.pi_e[4] == night.offpeak_price);
    CHECK(wrapped.pi_e[5] == night.peak_price);

    synth::TariffSpec bad;
    bad.feedin_price = 0.5;
    CHECK_THROWS_AS(synth::economy7_prices(bad, stamps), InvalidArgument);
}

TEST_CASE("synthetic weather is deterministic and physically shaped")
{
    auto stamps = synth::make_timestamps({2024, 6, 1}, {2024, 6, 7}, 0.5);
    auto a = synth::synth_weather_solar_load("Oxford", stamps, 0.5, 42);
    auto b = synth::synth_weather_solar_load("Oxford", stamps, 0.5, 42);
    CHECK(a.t_ext == b.t_ext);
    CHECK(a.p_solar == b.p_solar);
    CHECK(a.p_other == b.p_other);

    auto c = synth::synth_weather_solar_load("Oxford", stamps, 0.5, 43);
    CHECK(a.t_ext != c.t_ext);

    for (std::size_t k = 0; k < stamps.size(); ++k) {
        const int hour = stamps[k].second_of_day() / 3600;
        if (hour < 3 || hour >= 23)
            CHECK(a.p_solar[k] == 0.0);
        CHECK(a.p_solar[k] >= 0.0);
        CHECK(a.p_other[k] > 0.0);
    }
    CHECK(*std::max_element(a.p_solar.begin(), a.p_solar.end()) > 0.5);
}

TEST_CASE("cities get distinct stable climate offsets")
{
    const double london = synth::city_climate_offset("London");
    const double oxford = synth::city_climate_offset("Oxford");
    CHECK(london != oxford);
    CHECK(london == synth::city_climate_offset("London"));
    CHECK(std::abs(london) <= 1.5);
    CHECK(std::abs(oxford) <= 1.5);
}

TEST_CASE("scenario CSV round-trips and rejects bad rows")
{
    auto scenario = synth::make_scenario("York", {2024, 2, 1}, {2024, 2, 1}, 0.5, 5);
    std::ostringstream out;
    synth::write_scenario_csv(out, scenario);
    std::istringstream in(out.str());
    auto back = synth::read_scenario_csv(in);
    CHECK(back.size() == 48);
    CHECK(back.dt_hours == 0.5);
    CHECK(back.pi_e == scenario.pi_e);
    CHECK(back.t_ext == scenario.t_ext);

    const std::string header = "timestamp,pi_e,pi_s,p_solar,p_other,t_ext\n";
    std::istringstream feedin(header + "2024-02-01T00:00:00,0.1,0.2,0,0.3,5\n2024-02-01T00:30:00,0.1,0.05,0,0.3,5\n");
    try {
        synth::read_scenario_csv(feedin);
        FAIL("expected rejection");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    std::istringstream duplicate(header + "2024-02-01T00:00:00,0.1,0.05,0,0.3,5\n2024-02-01T00:00:00,0.1,0.05,0,0.3,5\n");
    try {
        synth::read_scenario_csv(duplicate);
        FAIL("expected rejection");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    std::istringstream missing("timestamp,pi_e,pi_s,p_solar,p_other\n");
    CHECK_THROWS_AS(synth::read_scenario_csv(missing), ParseError);

    std::istringstream garbage(header + "2024-02-01T00:00:00,abc,0.05,0,0.3,5\n");
    CHECK_THROWS_AS(synth::read_scenario_csv(garbage, 0.5), ParseError);
}

TEST_CASE("a demo week solves and beats the naive policy")
{
    HemsParameters params;
    params.date_start = {2024, 1, 15};
    params.date_end = {2024, 1, 21};
    params.city = "Oxford";
    params.ev_count = 1;
    params.ev_arrival_time = TimeOfDay{18 * 60};
    params.ev_departure_time = TimeOfDay{8 * 60};
    params.t_min = 19.0;
    params.t_max = 21.0;
    auto scenario = synth::make_scenario(params.city, params.date_start, params.date_end, 0.5, 1);
    REQUIRE(scenario.size() == 336);
    auto optimized = solve(build_problem(params, ThermalModel{}, EvModel{}, scenario));
    auto naive = naive_schedule(params, ThermalModel{}, EvModel{}, scenario);
    CHECK(validate(optimized, params, ThermalModel{}, EvModel{}, scenario).empty());
    CHECK(optimized.total_cost < naive.total_cost);
}
