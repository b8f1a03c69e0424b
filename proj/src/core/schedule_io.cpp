// SPDX-License-Identifier: Apache-2.0
#include "hems/core/schedule_io.hpp"

#include <fmt/format.h>

#include <ostream>

namespace hems {

void write_schedule_csv(std::ostream& out, const Schedule& s)
{
    out << "timestamp,occupied,pi_e,pi_s,p_solar,p_other,p_heat,p_ev,p_total,grid_import,grid_export,t_ext,t_house,"
           "e_ev\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        const bool home = k < s.occupancy.size() && s.occupancy[k];
        out << fmt::format("{},{},{:.4f},{:.4f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.4f},{:.6f},{:.6f}\n",
                           s.timestamps[k].iso(), home ? 1 : 0, s.pi_e[k], s.pi_s[k], s.p_solar[k], s.p_other[k],
                           s.p_heat[k], s.p_ev[k], s.p_total[k], s.grid_import[k], s.grid_export[k], s.t_ext[k],
                           s.t_house[k + 1], s.e_ev[k + 1]);
    }
    out << fmt::format("total_cost,{:.6f}\n", s.total_cost);
}

} // namespace hems
