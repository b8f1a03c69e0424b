// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/core/types.hpp"

#include <iosfwd>

namespace hems {

/// One row per step; t_house and e_ev are the values at the end of the
/// step. A trailing `total_cost,<£>` line closes the file.
void write_schedule_csv(std::ostream& out, const Schedule& schedule);

} // namespace hems
