// SPDX-License-Identifier: Apache-2.0
//
// Single-antenna, single-tap, pure-LoS cell with every PRB at the top MCS
// level, so requirement and feasibility results have closed forms.

#ifndef FWA_TESTS_TOY_HPP
#define FWA_TESTS_TOY_HPP

#include "fwa/planner.hpp"

#include <cmath>

namespace toy {

inline fwa::Scenario scenario(double mbr_dl, double mbr_ul)
{
    fwa::Scenario sc;
    sc.system.bs_antennas = 1;
    sc.system.home_antennas = 1;
    sc.system.home_power_w = 40.0; // keeps UL SINR above the top threshold even at n = C
    sc.system.mbr_dl_bps = mbr_dl;
    sc.system.mbr_ul_bps = mbr_ul;
    sc.cell.radius_m = 36.0;
    sc.cell.rician_mean_db = 300.0;
    sc.cell.rician_std_db = 0.0;
    sc.cell.shadowing = false;
    sc.cell.realization_count = 4;
    sc.seed = 11;
    return sc;
}

inline fwa::ChannelModel model(const fwa::Scenario &sc)
{
    return fwa::ChannelModel(sc.system, sc.cell, fwa::TapProfile::flat());
}

inline double top_prb_rate(const fwa::Scenario &sc)
{
    return sc.table.levels().back().se_bps_hz * sc.system.subchannel_bandwidth_hz;
}

/// Fewest PRBs for one home to reach `mbr` with `slots` of T slots.
inline int prbs_needed(const fwa::Scenario &sc, double mbr, int slots)
{
    const double need = mbr * sc.system.slots_per_frame / (slots * top_prb_rate(sc));
    return static_cast<int>(std::ceil(need * (1.0 - 1e-12)));
}

/// max over T_u of min(floor(C / n_d), floor(C / n_u)).
inline int user_limit(const fwa::Scenario &sc)
{
    const int T = sc.system.slots_per_frame, C = sc.system.subchannel_count;
    int best = 0;
    for (int tu = 1; tu < T; ++tu)
    {
        const int nd = prbs_needed(sc, sc.system.mbr_dl_bps, T - tu);
        const int nu = prbs_needed(sc, sc.system.mbr_ul_bps, tu);
        const int ud = nd <= C ? C / nd : 0, uu = nu <= C ? C / nu : 0;
        best = std::max(best, std::min(ud, uu));
    }
    return best;
}

} // namespace toy

#endif
