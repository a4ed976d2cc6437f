// SPDX-License-Identifier: Apache-2.0
//
// Minimal library use: plan one cell and check the limit on fresh draws.

#include "fwa/study.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    fwa::Scenario sc;
    sc.cell.radius_m = argc > 1 ? std::stod(argv[1]) : 5000.0;
    sc.cell.realization_count = 10;

    const fwa::ChannelModel model(sc.system, sc.cell);
    const auto plan = fwa::optimal_configuration(model, sc);
    if (!plan.supportable)
    {
        std::cout << "no configuration meets both MBRs at R = " << sc.cell.radius_m << " m\n";
        return 0;
    }
    const auto &v = plan.best;
    std::cout << "U* = " << plan.user_limit << " homes with T_u = " << v.ul_slots << ", S_d = " << v.dl_group_size
              << ", S_u = " << v.ul_group_size << '\n';

    const double f = fwa::feasibility_fraction(model, sc, plan.user_limit, v, sc.cell.realization_count);
    std::cout << "fraction of fresh realizations served: " << f << '\n';
}
