// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive grid search for tiny max-min power-distribution instances
// (at most 3 streams per subchannel, at most 2 subchannels). Every budget is
// split in `units` equal steps. Independent of the solver: only the rate law
// is shared.

#ifndef FWA_VERIFY_GRID_ORACLE_HPP
#define FWA_VERIFY_GRID_ORACLE_HPP

#include "fwa/pd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fwa::verify {

using Table = std::vector<double>;

/// r[p] for p = 0..units, per B_C, for power p * budget / units.
inline Table rate_table(double gain, const McsApprox &ap, double budget, int units)
{
    Table r(static_cast<std::size_t>(units) + 1, 0.0);
    if (gain < gain_floor)
        return r;
    for (int p = 1; p <= units; ++p)
        r[static_cast<std::size_t>(p)] =
            std::min(ap.se_max, ap.a * std::pow(gain * budget * p / units, ap.b));
    return r;
}

/// (a (+) b)[p] = max_{i+j=p} a[i] + b[j].
inline Table max_plus(const Table &a, const Table &b)
{
    const std::size_t n = a.size();
    Table out(n, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; i + j < n; ++j)
            out[i + j] = std::max(out[i + j], a[i] + b[j]);
    return out;
}

/// Best rate of home k on subchannel c for every power level.
inline Table home_table(const PdInstance &in, int c, int k, int units)
{
    Table t = rate_table(in.gain(c, k, 0), in.approx, in.budget_w, units);
    for (int l = 1; l < in.streams; ++l)
        t = max_plus(t, rate_table(in.gain(c, k, l), in.approx, in.budget_w, units));
    return t;
}

/// Smallest p with t[p] >= target, or units + 1 when unreachable.
inline int need(const Table &t, double target)
{
    auto it = std::lower_bound(t.begin(), t.end(), target);
    return static_cast<int>(it - t.begin());
}

namespace detail {

inline bool feasible_one(const std::vector<Table> &tabs, double target, int units)
{
    long total = 0;
    for (const auto &t : tabs)
    {
        total += need(t, target);
        if (total > units)
            return false;
    }
    return true;
}

// Three homes on two subchannels: exists (a_k, b_k) with sum a <= N, sum b <= N.
inline bool feasible_three_two(const std::vector<Table> &t1, const std::vector<Table> &t2, double target, int units)
{
    const std::size_t n = static_cast<std::size_t>(units) + 1;
    std::vector<std::vector<int>> nb(3, std::vector<int>(n));
    for (int k = 0; k < 3; ++k)
        for (std::size_t a = 0; a < n; ++a)
            nb[static_cast<std::size_t>(k)][a] = need(t2[static_cast<std::size_t>(k)], target - t1[static_cast<std::size_t>(k)][a]);
    // min over a1 + a2 = s of nb0[a1] + nb1[a2]
    std::vector<int> pair(n, std::numeric_limits<int>::max() / 2);
    for (std::size_t a1 = 0; a1 < n; ++a1)
    {
        const int x = nb[0][a1];
        if (x > units)
            continue;
        for (std::size_t a2 = 0; a1 + a2 < n; ++a2)
            pair[a1 + a2] = std::min(pair[a1 + a2], x + nb[1][a2]);
    }
    for (std::size_t s = 0; s < n; ++s)
        if (pair[s] <= units && pair[s] + nb[2][n - 1 - s] <= units)
            return true;
    return false;
}

} // namespace detail

/// Grid optimum of the max-min program, in bps with the time fraction applied.
inline double grid_oracle_pd(const PdInstance &in, int units = 10000)
{
    in.validate();
    const int K = in.homes;
    if (in.homes * in.streams > 3 || in.subchannels > 2)
        throw std::invalid_argument("grid oracle: at most 3 streams per subchannel and 2 subchannels");
    const double scale = in.subchannel_bandwidth_hz * in.time_fraction();

    std::vector<std::vector<Table>> tab(static_cast<std::size_t>(in.subchannels));
    for (int c = 0; c < in.subchannels; ++c)
        for (int k = 0; k < K; ++k)
            tab[static_cast<std::size_t>(c)].push_back(home_table(in, c, k, units));

    const auto N = static_cast<std::size_t>(units);
    if (in.direction == Direction::uplink || K == 1)
    {
        double lo = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k)
        {
            double r = 0.0;
            for (int c = 0; c < in.subchannels; ++c)
                r += tab[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)][N];
            lo = std::min(lo, r);
        }
        return lo * scale;
    }

    if (in.subchannels == 2 && K == 2)
    {
        // home 0 takes (a, b); home 1 the rest. Inner max over b by bisection on the crossing.
        const auto &x0 = tab[0][0], &x1 = tab[0][1], &y0 = tab[1][0], &y1 = tab[1][1];
        double best = 0.0;
        for (std::size_t a = 0; a <= N; ++a)
        {
            const double p = x0[a], q = x1[N - a];
            std::size_t lo = 0, hi = N;
            while (lo < hi)
            {
                const std::size_t mid = (lo + hi) / 2;
                if (p + y0[mid] >= q + y1[N - mid])
                    hi = mid;
                else
                    lo = mid + 1;
            }
            for (std::size_t b : {lo, lo > 0 ? lo - 1 : lo})
                best = std::max(best, std::min(p + y0[b], q + y1[N - b]));
        }
        return best * scale;
    }

    // Bisection on the common target rate.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k)
    {
        double r = 0.0;
        for (int c = 0; c < in.subchannels; ++c)
            r += tab[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)][N];
        hi = std::min(hi, r);
    }
    auto feasible = [&](double t) {
        if (in.subchannels == 1)
            return detail::feasible_one(tab[0], t, units);
        return detail::feasible_three_two(tab[0], tab[1], t, units);
    };
    if (feasible(hi))
        return hi * scale;
    for (int it = 0; it < 40 && hi - lo > 1e-9 * hi; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo * scale;
}

} // namespace fwa::verify

#endif
