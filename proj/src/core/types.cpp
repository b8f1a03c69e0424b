// SPDX-License-Identifier: Apache-2.0
#include "hems/core/types.hpp"

#include "hems/error.hpp"

#include <cmath>
#include <string>

namespace hems {

namespace {

std::string fmt_step(std::size_t k) { return " at step " + std::to_string(k); }

void check_length(const std::vector<double>& series, std::size_t expected, const char* name)
{
    if (series.size() != expected)
        throw InvalidArgument(std::string("series length mismatch: ") + name + " has " +
                              std::to_string(series.size()) + " entries, expected " + std::to_string(expected));
}

} // namespace

void HemsParameters::validate() const
{
    if (!date_start.valid() || !date_end.valid())
        throw InvalidArgument("invalid calendar date");
    if (date_end < date_start)
        throw InvalidArgument("date_start must not be after date_end");
    if (!(t_min < t_max))
        throw InvalidArgument("t_min must be below t_max");
    if (ev_arrival_time == ev_departure_time)
        throw InvalidArgument("ev_arrival_time must differ from ev_departure_time");
    if (ev_count < 0)
        throw InvalidArgument("ev_count must be nonnegative");
    if (!std::isfinite(t_min) || !std::isfinite(t_max))
        throw InvalidArgument("comfort temperatures must be finite");
}

ThermalModel::ThermalModel(double c_th, double r_th, double eta, double heater_rating_kw)
    : c_th_(c_th), r_th_(r_th), eta_(eta), heater_rating_kw_(heater_rating_kw)
{
    if (!(c_th > 0.0) || !(r_th > 0.0) || !(eta > 0.0))
        throw InvalidArgument("thermal model requires c_th > 0, r_th > 0 and eta > 0");
    if (!(heater_rating_kw >= 0.0) || !std::isfinite(heater_rating_kw))
        throw InvalidArgument("heater rating must be a finite nonnegative power");
}

void EvModel::validate() const
{
    if (!(battery_capacity_per_vehicle > 0.0))
        throw InvalidArgument("battery capacity must be positive");
    if (!(e_init_fraction >= 0.0 && e_init_fraction < 1.0))
        throw InvalidArgument("e_init_fraction must lie in [0, 1)");
    if (!(p_charge_max_per_vehicle > 0.0))
        throw InvalidArgument("maximum charging power must be positive");
    if (p_charge_min != 0.0)
        throw InvalidArgument("minimum charging power must be zero (no vehicle-to-grid)");
}

void ScenarioSeries::validate() const
{
    if (!(dt_hours > 0.0) || !std::isfinite(dt_hours))
        throw InvalidArgument("dt must be positive");
    const std::size_t n = timestamps.size();
    if (n == 0)
        throw InvalidArgument("scenario is empty");
    check_length(pi_e, n, "pi_e");
    check_length(pi_s, n, "pi_s");
    check_length(p_solar, n, "p_solar");
    check_length(p_other, n, "p_other");
    check_length(t_ext, n, "t_ext");

    const auto step_seconds = static_cast<std::int64_t>(std::llround(dt_hours * 3600.0));
    for (std::size_t k = 1; k < n; ++k) {
        if (timestamps[k] <= timestamps[k - 1])
            throw InvalidArgument("timestamps must be strictly increasing" + fmt_step(k));
        if (timestamps[k].seconds - timestamps[k - 1].seconds != step_seconds)
            throw InvalidArgument("timestamps must be spaced by dt" + fmt_step(k));
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(pi_e[k]) || !std::isfinite(pi_s[k]) || !std::isfinite(p_solar[k]) ||
            !std::isfinite(p_other[k]) || !std::isfinite(t_ext[k]))
            throw InvalidArgument("non-finite value" + fmt_step(k));
        if (pi_s[k] > pi_e[k])
            throw InvalidArgument("feed-in exceeds import price" + fmt_step(k));
        if (p_solar[k] < 0.0)
            throw InvalidArgument("negative solar power" + fmt_step(k));
        if (p_other[k] < 0.0)
            throw InvalidArgument("negative baseline load" + fmt_step(k));
    }
}

} // namespace hems
