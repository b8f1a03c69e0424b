// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/time.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hems {

/// The eight household values that configure one optimization run.
struct HemsParameters {
    Date date_start;
    Date date_end;
    int ev_count = 0;
    std::string city;
    TimeOfDay ev_arrival_time;
    TimeOfDay ev_departure_time;
    double t_min = 18.0;
    double t_max = 20.0;

    /// Throws InvalidArgument naming the first violated invariant.
    void validate() const;

    bool operator==(const HemsParameters&) const = default;
};

/// First-order RC model of the house. alpha and beta are derived on every
/// call, so they cannot drift from the physical constants.
class ThermalModel {
public:
    /// Residential heating constants: C = 2 kWh/°C, R = 10 °C/kW, COP 1.
    ThermalModel() : ThermalModel(2.0, 10.0, 1.0) {}
    ThermalModel(double c_th, double r_th, double eta, double heater_rating_kw = 5.0);

    double c_th() const { return c_th_; }
    double r_th() const { return r_th_; }
    double eta() const { return eta_; }
    double heater_rating_kw() const { return heater_rating_kw_; }

    /// Heat-loss rate 1/(R C), per hour.
    double alpha() const { return 1.0 / (r_th_ * c_th_); }
    /// Heating gain eta/C, °C per kWh.
    double beta() const { return eta_ / c_th_; }

    /// One explicit step of the house temperature recursion.
    double step(double t_house, double t_ext, double p_heat, double dt_hours) const
    {
        return dt_hours * (beta() * p_heat + alpha() * (t_ext - t_house)) + t_house;
    }

    /// Starting temperature of the horizon; defaults to the comfort minimum.
    std::optional<double> initial_temperature;

private:
    double c_th_;
    double r_th_;
    double eta_;
    double heater_rating_kw_;
};

/// Aggregate battery of the household's vehicles. Charge-only (no V2G).
/// Defaults are artifact choices: 40 kWh, 20 % at arrival, 7 kW charger.
struct EvModel {
    double battery_capacity_per_vehicle = 40.0;
    double e_init_fraction = 0.2;
    double p_charge_max_per_vehicle = 7.0;
    double p_charge_min = 0.0;

    void validate() const;

    double full_energy(int ev_count) const { return battery_capacity_per_vehicle * ev_count; }
    double initial_energy(int ev_count) const { return e_init_fraction * full_energy(ev_count); }
    double max_power(int ev_count) const { return p_charge_max_per_vehicle * ev_count; }
};

/// Time-aligned exogenous inputs over the horizon.
struct ScenarioSeries {
    double dt_hours = 0.5;
    std::vector<Instant> timestamps;
    std::vector<double> pi_e;    ///< import price, £/kWh
    std::vector<double> pi_s;    ///< feed-in price, £/kWh
    std::vector<double> p_solar; ///< kW
    std::vector<double> p_other; ///< kW
    std::vector<double> t_ext;   ///< °C

    std::size_t size() const { return timestamps.size(); }

    /// Throws InvalidArgument naming the violated rule.
    void validate() const;
};

/// Decision and state trajectories. Power series have one entry per step;
/// e_ev and t_house have one entry per step boundary (size + 1).
struct Schedule {
    double dt_hours = 0.5;
    std::vector<Instant> timestamps;
    std::vector<bool> occupancy;
    std::vector<double> p_heat;
    std::vector<double> p_ev;
    std::vector<double> p_other;
    std::vector<double> p_solar;
    std::vector<double> p_total;
    std::vector<double> grid_import;
    std::vector<double> grid_export;
    std::vector<double> pi_e;
    std::vector<double> pi_s;
    std::vector<double> t_ext;
    std::vector<double> e_ev;
    std::vector<double> t_house;
    double total_cost = 0.0;

    std::size_t size() const { return p_heat.size(); }
};

} // namespace hems
