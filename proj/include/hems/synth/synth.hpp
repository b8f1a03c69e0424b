// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace hems::synth {

/// Two-rate tariff with a cheap window (Economy 7 shape). The default
/// numbers are illustrative artifact values.
struct TariffSpec {
    TimeOfDay offpeak_start{30};
    TimeOfDay offpeak_end{7 * 60 + 30};
    double offpeak_price = 0.13;
    double peak_price = 0.30;
    double feedin_price = 0.05;

    /// Requires feedin <= offpeak <= peak and distinct window ends.
    void validate() const;
};

struct PriceSeries {
    std::vector<double> pi_e;
    std::vector<double> pi_s;
};

/// Whole days from the start of `first` to the end of `last`, every dt.
std::vector<Instant> make_timestamps(Date first, Date last, double dt_hours);

/// Import price is `offpeak_price` for steps starting inside the cyclic
/// off-peak window and `peak_price` otherwise; feed-in is constant.
PriceSeries economy7_prices(const TariffSpec& spec, const std::vector<Instant>& timestamps);

struct WeatherSeries {
    std::vector<double> t_ext;
    std::vector<double> p_solar;
    std::vector<double> p_other;
};

/// Stable per-city temperature offset in [-1.5, 1.5] °C (FNV-1a of the name).
double city_climate_offset(std::string_view city);

/// Synthetic stand-in for weather, rooftop solar and household load:
/// diurnal temperature sinusoid, daylight bell-shaped solar (zero at night),
/// and a two-peak residential load. Pure function of its arguments.
WeatherSeries synth_weather_solar_load(std::string_view city, const std::vector<Instant>& timestamps,
                                       double dt_hours, std::uint64_t seed);

/// Tariff plus synthetic weather over [first, last].
ScenarioSeries make_scenario(std::string_view city, Date first, Date last, double dt_hours, std::uint64_t seed,
                             const TariffSpec& tariff = {});

/// CSV header `timestamp,pi_e,pi_s,p_solar,p_other,t_ext`. The step length is
/// inferred from the timestamp spacing unless given.
ScenarioSeries read_scenario_csv(std::istream& in, std::optional<double> dt_hours = std::nullopt);
ScenarioSeries load_scenario_csv(const std::filesystem::path& path, std::optional<double> dt_hours = std::nullopt);
void write_scenario_csv(std::ostream& out, const ScenarioSeries& scenario);

} // namespace hems::synth
