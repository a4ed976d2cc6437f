// SPDX-License-Identifier: Apache-2.0
//
// Direct feasibility checks with a concrete number of homes: brute-force
// validation of the planner limit and the weighted-sum-rate operating study.
//
// One realization of U homes is grouped and solved once per (direction, S)
// with the whole frame as time share. Every configuration then reuses those
// frame rates, scaled by its slot count.

#ifndef FWA_STUDY_HPP
#define FWA_STUDY_HPP

#include "fwa/planner.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace fwa {

struct DirectionOutcome
{
    double min_rate = 0.0; // realized, whole frame, min over every home of every group
    double sum_rate = 0.0; // realized, whole frame, sum over homes
};

/// Frame outcomes of one realization, indexed by group size S - 1.
struct RealizationOutcomes
{
    std::vector<DirectionOutcome> dl;
    std::vector<DirectionOutcome> ul;
};

struct OperationSamples
{
    int homes = 0;
    int streams = 0;
    std::vector<RealizationOutcomes> realizations;
    int failed_solves = 0;
};

/// Groups the homes with size S, splits the C subchannels with the leftover
/// rule and solves every group.
inline DirectionOutcome evaluate_direction(const ChannelModel &model, const Scenario &sc, const std::vector<Home> &homes,
                                           Direction dir, int group_size, int streams, Rng &rng)
{
    const auto groups = form_groups(static_cast<int>(homes.size()), group_size, rng);
    const auto channels = allocate_subchannels(static_cast<int>(groups.size()), sc.system.subchannel_count, rng);
    DirectionOutcome out;
    out.min_rate = std::numeric_limits<double>::infinity();
    if (homes.empty())
        return {};
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        const auto &ch = channels[g];
        if (ch.empty())
        {
            out.min_rate = 0.0;
            continue;
        }
        std::vector<Home> members;
        for (int id : groups[g])
            members.push_back(homes[static_cast<std::size_t>(id)]);
        GroupChannels gc(model, std::move(members), ch, streams);
        if (!gc.extend(static_cast<int>(ch.size())))
        {
            out.min_rate = 0.0;
            continue;
        }
        const auto fr = solve_frame_rates(make_instance(dir, gc, static_cast<int>(ch.size()), sc), sc.table);
        out.min_rate = std::min(out.min_rate, fr.min_rate);
        out.sum_rate += fr.sum_rate;
    }
    return out;
}

/// Draws `count` realizations of U homes and evaluates both directions for
/// the requested group sizes (all of [1, N] when empty). Group sizes above U
/// form the same single group as S = U and reuse its outcome. `tag`
/// separates independent studies.
inline OperationSamples sample_operation(const ChannelModel &model, const Scenario &sc, int homes, int streams,
                                         int count, std::uint64_t tag, int jobs, std::vector<int> dl_sizes = {},
                                         std::vector<int> ul_sizes = {})
{
    const int N = bd_user_cap(sc.system);
    auto usable = [&](int S) { return S >= 1 && S <= N && (S - 1) * sc.system.home_antennas < sc.system.bs_antennas; };
    auto fill = [&](std::vector<int> &v) {
        if (v.empty())
            for (int S = 1; S <= N; ++S)
                v.push_back(S);
        for (int S : v)
            if (!usable(S))
                throw std::invalid_argument("sample_operation: group size " + std::to_string(S) + " not usable");
    };
    fill(dl_sizes);
    fill(ul_sizes);
    OperationSamples out;
    out.homes = homes;
    out.streams = streams;
    out.realizations.resize(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), jobs, [&](std::size_t w) {
        const auto u = static_cast<std::uint64_t>(homes);
        Rng rng = make_rng(sc.seed, {tag, u, w});
        const auto hs = model.sample_homes(homes, rng);
        auto &r = out.realizations[w];
        r.dl.resize(static_cast<std::size_t>(N));
        r.ul.resize(static_cast<std::size_t>(N));
        for (int d = 0; d < 2; ++d)
        {
            const Direction dir = d == 0 ? Direction::downlink : Direction::uplink;
            auto &dst = d == 0 ? r.dl : r.ul;
            auto sizes = d == 0 ? dl_sizes : ul_sizes;
            std::sort(sizes.begin(), sizes.end());
            std::vector<char> done(static_cast<std::size_t>(N + 1), 0);
            auto eval = [&](int S) {
                if (done[static_cast<std::size_t>(S)])
                    return;
                Rng g = make_rng(sc.seed, {tag, u, w, stream::grouping, static_cast<std::uint64_t>(d),
                                           static_cast<std::uint64_t>(S)});
                dst[static_cast<std::size_t>(S - 1)] = evaluate_direction(model, sc, hs, dir, S, streams, g);
                done[static_cast<std::size_t>(S)] = 1;
            };
            for (int S : sizes)
            {
                if (S > homes && usable(homes))
                {
                    eval(homes);
                    dst[static_cast<std::size_t>(S - 1)] = dst[static_cast<std::size_t>(homes - 1)];
                }
                else
                    eval(S);
            }
        }
    });
    return out;
}

inline bool realization_feasible(const RealizationOutcomes &r, const Configuration &v, const SystemSetting &s)
{
    const int T = s.slots_per_frame;
    return meets(r.dl[static_cast<std::size_t>(v.dl_group_size - 1)].min_rate, T - v.ul_slots, T, s.mbr_dl_bps) &&
           meets(r.ul[static_cast<std::size_t>(v.ul_group_size - 1)].min_rate, v.ul_slots, T, s.mbr_ul_bps);
}

inline double feasibility_fraction(const OperationSamples &samples, const Configuration &v, const SystemSetting &s)
{
    if (samples.realizations.empty())
        return 0.0;
    int ok = 0;
    for (const auto &r : samples.realizations)
        ok += realization_feasible(r, v, s) ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(samples.realizations.size());
}

/// Fraction of `count` fresh realizations of U homes in which every group in
/// both directions meets its MBR under configuration v.
inline double feasibility_fraction(const ChannelModel &model, const Scenario &sc, int homes, const Configuration &v,
                                   int count, int jobs = 1)
{
    v.validate(sc.system);
    const auto samples = sample_operation(model, sc, homes, v.streams, count, stream::operation, jobs,
                                          {v.dl_group_size}, {v.ul_group_size});
    return feasibility_fraction(samples, v, sc.system);
}

inline bool u_feasible(double fraction, double quantile) { return fraction >= quantile - 1e-12; }

struct ValidationStep
{
    int homes = 0;
    double best_fraction = 0.0;
    std::optional<Configuration> qualifying; // first configuration reaching the quantile
};

struct ValidationReport
{
    int planner_limit = 0;
    int brute_force_limit = 0;
    bool start_failed = false;
    bool budget_exhausted = false;
    int realizations = 0;
    std::uint64_t seed = 0;
    std::vector<ValidationStep> steps;
};

inline ValidationStep best_configuration_for(const OperationSamples &samples, const Scenario &sc, int streams)
{
    const auto &s = sc.system;
    const int N = bd_user_cap(s);
    ValidationStep step;
    step.homes = samples.homes;
    for (int tu = 1; tu < s.slots_per_frame; ++tu)
        for (int sd = 1; sd <= N; ++sd)
            for (int su = 1; su <= N; ++su)
            {
                const Configuration v{tu, sd, su, streams};
                const double f = feasibility_fraction(samples, v, s);
                step.best_fraction = std::max(step.best_fraction, f);
                if (!step.qualifying && u_feasible(f, sc.cell.feasibility_quantile))
                    step.qualifying = v;
            }
    return step;
}

/// Increments X from start_U until no configuration is U-feasible; the limit
/// is the last X that passed. Stops after `max_steps` values of X.
inline ValidationReport brute_force_limit(const ChannelModel &model, const Scenario &sc, int start_u, int streams,
                                          int jobs = 1, int max_steps = 200)
{
    if (start_u < 1)
        throw std::invalid_argument("brute_force_limit: start_U must be >= 1");
    ValidationReport rep;
    rep.planner_limit = start_u;
    rep.realizations = sc.cell.realization_count;
    rep.seed = sc.seed;
    int x = start_u;
    for (int step = 0;; ++step, ++x)
    {
        if (step >= max_steps)
        {
            rep.budget_exhausted = true;
            break;
        }
        const auto samples = sample_operation(model, sc, x, streams, sc.cell.realization_count, stream::operation, jobs);
        auto st = best_configuration_for(samples, sc, streams);
        const bool ok = st.qualifying.has_value();
        rep.steps.push_back(std::move(st));
        if (!ok)
            break;
    }
    rep.brute_force_limit = x - 1;
    rep.start_failed = rep.brute_force_limit < start_u;
    return rep;
}

inline double weighted_sum_rate(double alpha, double sr_dl, double sr_ul)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("weighted_sum_rate: alpha must lie in [0, 1]");
    return alpha * sr_dl + (1.0 - alpha) * sr_ul;
}

struct OperatingPoint
{
    Configuration config;
    double sr_dl = 0.0; // bps, mean over feasible realizations
    double sr_ul = 0.0;
    double wsr = 0.0;
    double fraction = 0.0;
    bool feasible = false;
};

inline OperatingPoint operating_point(const OperationSamples &samples, const Configuration &v, const Scenario &sc,
                                      double alpha)
{
    const auto &s = sc.system;
    const int T = s.slots_per_frame;
    OperatingPoint p;
    p.config = v;
    int ok = 0;
    for (const auto &r : samples.realizations)
        if (realization_feasible(r, v, s))
        {
            ++ok;
            p.sr_dl += r.dl[static_cast<std::size_t>(v.dl_group_size - 1)].sum_rate * (T - v.ul_slots) / T;
            p.sr_ul += r.ul[static_cast<std::size_t>(v.ul_group_size - 1)].sum_rate * v.ul_slots / T;
        }
    if (ok > 0)
    {
        p.sr_dl /= ok;
        p.sr_ul /= ok;
    }
    p.fraction = samples.realizations.empty() ? 0.0 : static_cast<double>(ok) / samples.realizations.size();
    p.feasible = u_feasible(p.fraction, sc.cell.feasibility_quantile);
    p.wsr = weighted_sum_rate(alpha, p.sr_dl, p.sr_ul);
    return p;
}

struct OperationReport
{
    int homes = 0;
    double alpha = 0.5;
    std::optional<OperatingPoint> best;
    std::vector<OperatingPoint> frontier; // best U-feasible point per T_u
    std::optional<OperatingPoint> planning; // the supplied planning configuration
};

/// Enumerates every configuration, keeps the U-feasible ones and ranks them by WSR.
inline OperationReport best_operating_config(const OperationSamples &samples, const Scenario &sc, double alpha,
                                             const std::optional<Configuration> &planning = std::nullopt)
{
    const auto &s = sc.system;
    const int N = bd_user_cap(s);
    OperationReport rep;
    rep.homes = samples.homes;
    rep.alpha = alpha;
    for (int tu = 1; tu < s.slots_per_frame; ++tu)
    {
        std::optional<OperatingPoint> best_tu;
        for (int sd = 1; sd <= N; ++sd)
            for (int su = 1; su <= N; ++su)
            {
                const auto p = operating_point(samples, {tu, sd, su, samples.streams}, sc, alpha);
                if (p.feasible && (!best_tu || p.wsr > best_tu->wsr))
                    best_tu = p;
            }
        if (best_tu)
        {
            rep.frontier.push_back(*best_tu);
            if (!rep.best || best_tu->wsr > rep.best->wsr)
                rep.best = best_tu;
        }
    }
    if (planning)
        rep.planning = operating_point(samples, *planning, sc, alpha);
    return rep;
}

inline OperationReport best_operating_config(const ChannelModel &model, const Scenario &sc, int homes, double alpha,
                                             int streams, int jobs = 1,
                                             const std::optional<Configuration> &planning = std::nullopt)
{
    const auto samples = sample_operation(model, sc, homes, streams, sc.cell.realization_count, stream::operation, jobs);
    return best_operating_config(samples, sc, alpha, planning);
}

} // namespace fwa

#endif
