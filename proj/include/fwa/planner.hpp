// SPDX-License-Identifier: Apache-2.0
//
// Grouping, subchannel allocation, per-realization subchannel requirements,
// the quantile requirement table and the optimal-configuration search.

#ifndef FWA_PLANNER_HPP
#define FWA_PLANNER_HPP

#include "fwa/bd.hpp"
#include "fwa/channel.hpp"
#include "fwa/mcs.hpp"
#include "fwa/parallel.hpp"
#include "fwa/pd_solver.hpp"
#include "fwa/rng.hpp"
#include "fwa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwa {

inline constexpr int n_infeasible = std::numeric_limits<int>::max();

/// Random permutation of 0..homes-1 chunked into ceil(homes / S) groups.
inline std::vector<std::vector<int>> form_groups(int homes, int group_size, Rng &rng)
{
    if (group_size < 1)
        throw std::invalid_argument("form_groups: group size must be >= 1");
    std::vector<int> ids(static_cast<std::size_t>(std::max(homes, 0)));
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::vector<int>> groups;
    for (std::size_t i = 0; i < ids.size(); i += static_cast<std::size_t>(group_size))
        groups.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i),
                            ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + group_size)));
    return groups;
}

/// floor(C / G) random channels per group, one extra to the first C mod G groups.
inline std::vector<std::vector<int>> allocate_subchannels(int groups, int subchannel_count, Rng &rng)
{
    if (groups < 1)
        throw std::invalid_argument("allocate_subchannels: group count must be >= 1");
    std::vector<int> ids(static_cast<std::size_t>(subchannel_count));
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int base = subchannel_count / groups, extra = subchannel_count % groups;
    std::vector<std::vector<int>> out(static_cast<std::size_t>(groups));
    auto it = ids.begin();
    for (int g = 0; g < groups; ++g)
    {
        const int take = base + (g < extra ? 1 : 0);
        out[static_cast<std::size_t>(g)].assign(it, it + take);
        it += take;
    }
    return out;
}

/// floor(C / n) * S homes served in one direction.
inline int direction_user_limit(int n, int subchannel_count, int group_size)
{
    if (n < 1 || n > subchannel_count)
        return 0;
    return (subchannel_count / n) * group_size;
}

/// The ceil(q |Omega|)-th smallest per-realization minimum; n_infeasible entries sort last.
inline int n_required(std::span<const int> minima, double quantile)
{
    if (minima.empty())
        throw std::invalid_argument("n_required: empty realization set");
    if (!(quantile > 0.0 && quantile <= 1.0))
        throw std::invalid_argument("n_required: quantile must lie in (0, 1]");
    std::vector<int> sorted(minima.begin(), minima.end());
    std::sort(sorted.begin(), sorted.end());
    const auto m = static_cast<double>(sorted.size());
    auto k = static_cast<std::size_t>(std::ceil(quantile * m - 1e-9));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

/// Fewest subchannels with which the MBR could be met at top-level MCS on every
/// stream, when the direction holds `slots` of the T frame slots.
inline int c_min_slots(double mbr_bps, int slots, const SystemSetting &s, int streams, double se_max)
{
    return c_min(mbr_bps * s.slots_per_frame / slots, s.subchannel_bandwidth_hz, streams, se_max);
}

/// Homes of one group plus the order in which subchannels are handed to it.
/// Effective channels are computed for a prefix of that order on demand.
class GroupChannels
{
  public:
    GroupChannels(const ChannelModel &model, std::vector<Home> homes, std::vector<int> channel_order, int streams)
        : model_(&model), homes_(std::move(homes)), order_(std::move(channel_order)), streams_(streams),
          noise_(noise_power(model.setting()))
    {
    }

    int homes() const { return static_cast<int>(homes_.size()); }
    int streams() const { return streams_; }
    int available() const { return static_cast<int>(order_.size()); }
    int computed() const { return computed_; }
    bool rank_deficient() const { return rank_deficient_; }
    const std::vector<Home> &home_list() const { return homes_; }

    /// Effective channels for the first n channels, E[c][k][l]. False when BD
    /// cannot carry the streams.
    bool extend(int n)
    {
        if (n > available())
            throw std::out_of_range("GroupChannels: not enough channels");
        std::vector<CMatrix> g(homes_.size());
        while (!rank_deficient_ && computed_ < n)
        {
            const int c = order_[static_cast<std::size_t>(computed_)];
            for (std::size_t k = 0; k < homes_.size(); ++k)
                g[k] = model_->channel(homes_[k], c);
            try
            {
                const auto set = bd_effective_channels(g, noise_, streams_);
                for (const auto &e : set.gains)
                    for (int l = 0; l < streams_; ++l)
                        gains_.push_back(e(l));
                ++computed_;
            }
            catch (const BdRankError &)
            {
                rank_deficient_ = true;
            }
        }
        return !rank_deficient_;
    }

    std::span<const double> gains(int n) const
    {
        return {gains_.data(), static_cast<std::size_t>(n) * homes_.size() * static_cast<std::size_t>(streams_)};
    }

  private:
    const ChannelModel *model_;
    std::vector<Home> homes_;
    std::vector<int> order_;
    int streams_;
    double noise_;
    int computed_ = 0;
    bool rank_deficient_ = false;
    std::vector<double> gains_;
};

/// Power-distribution instance for the first n channels of a group, with the
/// whole frame as time share (scale realized rates by slots / T afterwards).
inline PdInstance make_instance(Direction dir, const GroupChannels &gc, int n, const Scenario &sc)
{
    PdInstance in;
    in.direction = dir;
    in.homes = gc.homes();
    in.streams = gc.streams();
    in.subchannels = n;
    const auto g = gc.gains(n);
    in.gains.assign(g.begin(), g.end());
    in.slots = sc.system.slots_per_frame;
    in.frame_slots = sc.system.slots_per_frame;
    in.budget_w = dir == Direction::downlink ? prb_power_dl(sc.system) : sc.system.home_power_w / n;
    in.approx = sc.approx;
    in.subchannel_bandwidth_hz = sc.system.subchannel_bandwidth_hz;
    return in;
}

struct FrameRates
{
    std::vector<double> home_rates; // realized, whole frame
    double min_rate = 0.0;
    double sum_rate = 0.0;
    bool converged = true;
};

inline FrameRates solve_frame_rates(const PdInstance &in, const McsTable &table, std::vector<double> *warm = nullptr)
{
    PdOptions opt;
    opt.warm_start = warm;
    const auto alloc = solve_pd(in, opt);
    if (warm)
        *warm = alloc.log_weights;
    const auto rr = realized_rates(alloc, in, table);
    FrameRates out;
    out.home_rates = rr.home_rates;
    out.min_rate = *std::min_element(rr.home_rates.begin(), rr.home_rates.end());
    out.sum_rate = std::accumulate(rr.home_rates.begin(), rr.home_rates.end(), 0.0);
    out.converged = alloc.converged;
    return out;
}

inline bool meets(double frame_rate, int slots, int frame_slots, double mbr)
{
    return frame_rate * slots / frame_slots >= mbr * (1.0 - 1e-12);
}

/// Linear scan n = n_lo, n_lo + 1, ... over the group's channel order. For each
/// slot count s in `slots` the first n with every home at its MBR is recorded,
/// searching no further than cutoffs[s]. Unmet entries are n_infeasible.
inline std::vector<int> scan_requirements(GroupChannels &gc, Direction dir, const Scenario &sc,
                                          std::span<const int> slots, std::span<const int> cutoffs)
{
    const auto &s = sc.system;
    const double mbr = dir == Direction::downlink ? s.mbr_dl_bps : s.mbr_ul_bps;
    std::vector<int> first(slots.size(), n_infeasible), lower(slots.size());
    int n_lo = std::numeric_limits<int>::max(), n_hi = 0;
    for (std::size_t j = 0; j < slots.size(); ++j)
    {
        lower[j] = c_min_slots(mbr, slots[j], s, gc.streams(), sc.approx.se_max);
        if (lower[j] <= cutoffs[j])
        {
            n_lo = std::min(n_lo, lower[j]);
            n_hi = std::max(n_hi, cutoffs[j]);
        }
    }
    n_hi = std::min(n_hi, gc.available());
    std::vector<double> warm;
    for (int n = n_lo; n <= n_hi; ++n)
    {
        bool open = false;
        for (std::size_t j = 0; j < slots.size(); ++j)
            if (first[j] == n_infeasible && n <= cutoffs[j])
                open = true;
        if (!open)
            break;
        if (!gc.extend(n))
            break;
        const auto fr = solve_frame_rates(make_instance(dir, gc, n, sc), sc.table, &warm);
        for (std::size_t j = 0; j < slots.size(); ++j)
            if (first[j] == n_infeasible && n >= lower[j] && n <= cutoffs[j] &&
                meets(fr.min_rate, slots[j], s.slots_per_frame, mbr))
                first[j] = n;
    }
    return first;
}

/// Requirement scan for a single direction and slot count.
inline int min_subchannels_for_realization(GroupChannels &gc, Direction dir, int slots, const Scenario &sc)
{
    const int s[1] = {slots};
    const int cut[1] = {std::min(sc.system.subchannel_count, gc.available())};
    return scan_requirements(gc, dir, sc, s, cut).front();
}

/// Fresh group of S homes for requirement realization `index`, with a random subchannel order.
inline GroupChannels requirement_realization(const ChannelModel &model, const Scenario &sc, int group_size,
                                             int streams, int index)
{
    Rng rng = make_rng(sc.seed, {stream::requirement, static_cast<std::uint64_t>(group_size),
                                 static_cast<std::uint64_t>(index)});
    auto homes = model.sample_homes(group_size, rng);
    std::vector<int> order(static_cast<std::size_t>(sc.system.subchannel_count));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return GroupChannels(model, std::move(homes), std::move(order), streams);
}

enum class Requirement
{
    feasible,
    infeasible,   // fewer than the quantile meet the MBR with n <= C
    beyond_bound, // c_min already exceeds C
    pruned        // cannot improve on a smaller group; searched only up to `cutoff`
};

inline const char *to_string(Requirement r)
{
    switch (r)
    {
    case Requirement::feasible:
        return "feasible";
    case Requirement::infeasible:
        return "infeasible";
    case Requirement::beyond_bound:
        return "beyond_bound";
    case Requirement::pruned:
        return "pruned";
    }
    return "?";
}

struct RequirementEntry
{
    Direction direction;
    int ul_slots;   // T_u of the configuration
    int slots;      // slots of this direction
    int group_size; // S
    int streams;    // L
    Requirement status;
    int n;          // n(V, L) when feasible
    int cutoff;     // largest n searched
    int user_limit; // floor(C / n) * S, 0 unless feasible
    std::vector<int> per_realization;
};

struct RequirementTable
{
    std::vector<RequirementEntry> entries;

    const RequirementEntry *find(Direction d, int ul_slots, int group_size) const
    {
        for (const auto &e : entries)
            if (e.direction == d && e.ul_slots == ul_slots && e.group_size == group_size)
                return &e;
        return nullptr;
    }
};

struct PlanOptions
{
    int streams = 0; // 0: M_H
    int jobs = 1;
    bool prune = true;
};

struct PlanResult
{
    double radius_m = 0.0;
    std::uint64_t seed = 0;
    int realizations = 0;
    double quantile = 0.0;
    int streams = 0;
    bool supportable = false;
    int user_limit = 0;  // U*
    Configuration best;  // canonical optimum
    std::vector<Configuration> optima;
    std::vector<int> dl_limit; // index T_u - 1: max over S_d of U_d
    std::vector<int> ul_limit;
    std::vector<int> dl_group; // smallest S attaining it, 0 if none
    std::vector<int> ul_group;
    RequirementTable requirements;
    int unconverged_solves = 0;
};

/// Largest n with floor(C / n) * S >= best, i.e. the last n that could still
/// match the best limit found with smaller groups.
inline int prune_cutoff(int best, int subchannel_count, int group_size)
{
    if (best <= group_size)
        return subchannel_count;
    const int per_group = (best + group_size - 1) / group_size;
    return subchannel_count / per_group;
}

inline PlanResult optimal_configuration(const ChannelModel &model, const Scenario &sc, const PlanOptions &opt = {})
{
    sc.validate();
    const auto &s = sc.system;
    const int T = s.slots_per_frame, C = s.subchannel_count, N = bd_user_cap(s);
    const int L = opt.streams > 0 ? opt.streams : s.home_antennas;
    if (L > s.home_antennas)
        throw std::invalid_argument("optimal_configuration: streams exceed home antennas");
    const int omega = sc.cell.realization_count;

    PlanResult res;
    res.radius_m = sc.cell.radius_m;
    res.seed = sc.seed;
    res.realizations = omega;
    res.quantile = sc.cell.feasibility_quantile;
    res.streams = L;

    std::vector<int> slots(static_cast<std::size_t>(T - 1));
    std::iota(slots.begin(), slots.end(), 1);
    // best[dir][slots-1]
    std::vector<std::vector<int>> best(2, std::vector<int>(static_cast<std::size_t>(T - 1), 0));
    std::vector<std::vector<std::vector<int>>> limits(
        2, std::vector<std::vector<int>>(static_cast<std::size_t>(T - 1), std::vector<int>(N + 1, -1)));

    for (int S = 1; S <= N; ++S)
    {
        if ((S - 1) * s.home_antennas >= s.bs_antennas)
            break;
        std::vector<std::vector<int>> cut(2, std::vector<int>(slots.size()));
        for (int d = 0; d < 2; ++d)
            for (std::size_t j = 0; j < slots.size(); ++j)
                cut[d][j] = opt.prune ? prune_cutoff(best[d][j], C, S) : C;

        // minima[d][i][j]
        std::vector<std::vector<std::vector<int>>> minima(
            2, std::vector<std::vector<int>>(static_cast<std::size_t>(omega)));
        parallel_for(static_cast<std::size_t>(omega), opt.jobs, [&](std::size_t i) {
            auto gc = requirement_realization(model, sc, S, L, static_cast<int>(i));
            minima[0][i] = scan_requirements(gc, Direction::downlink, sc, slots, cut[0]);
            minima[1][i] = scan_requirements(gc, Direction::uplink, sc, slots, cut[1]);
        });

        for (int d = 0; d < 2; ++d)
        {
            const Direction dir = d == 0 ? Direction::downlink : Direction::uplink;
            const double mbr = d == 0 ? s.mbr_dl_bps : s.mbr_ul_bps;
            for (std::size_t j = 0; j < slots.size(); ++j)
            {
                RequirementEntry e;
                e.direction = dir;
                e.slots = slots[j];
                e.ul_slots = d == 0 ? T - slots[j] : slots[j];
                e.group_size = S;
                e.streams = L;
                e.cutoff = cut[d][j];
                e.per_realization.resize(static_cast<std::size_t>(omega));
                for (int i = 0; i < omega; ++i)
                    e.per_realization[static_cast<std::size_t>(i)] = minima[d][static_cast<std::size_t>(i)][j];
                e.n = n_required(e.per_realization, sc.cell.feasibility_quantile);
                e.user_limit = 0;
                if (c_min_slots(mbr, slots[j], s, L, sc.approx.se_max) > std::min(C, e.cutoff))
                    e.status = e.cutoff < C ? Requirement::pruned : Requirement::beyond_bound;
                else if (e.n == n_infeasible)
                    e.status = e.cutoff < C ? Requirement::pruned : Requirement::infeasible;
                else
                {
                    e.status = Requirement::feasible;
                    e.user_limit = direction_user_limit(e.n, C, S);
                }
                if (e.status == Requirement::beyond_bound)
                    e.per_realization.assign(static_cast<std::size_t>(omega), n_infeasible);
                const auto tu = static_cast<std::size_t>(e.ul_slots - 1);
                limits[d][tu][static_cast<std::size_t>(S)] = e.status == Requirement::pruned ? -1 : e.user_limit;
                best[d][j] = std::max(best[d][j], e.user_limit);
                res.requirements.entries.push_back(std::move(e));
            }
        }
    }

    res.dl_limit.assign(static_cast<std::size_t>(T - 1), 0);
    res.ul_limit.assign(static_cast<std::size_t>(T - 1), 0);
    res.dl_group.assign(static_cast<std::size_t>(T - 1), 0);
    res.ul_group.assign(static_cast<std::size_t>(T - 1), 0);
    for (int tu = 1; tu < T; ++tu)
    {
        const auto t = static_cast<std::size_t>(tu - 1);
        for (int d = 0; d < 2; ++d)
        {
            auto &lim = d == 0 ? res.dl_limit : res.ul_limit;
            auto &grp = d == 0 ? res.dl_group : res.ul_group;
            for (int S = 1; S <= N; ++S)
                if (limits[d][t][static_cast<std::size_t>(S)] > lim[t])
                {
                    lim[t] = limits[d][t][static_cast<std::size_t>(S)];
                    grp[t] = S;
                }
        }
        res.user_limit = std::max(res.user_limit, std::min(res.dl_limit[t], res.ul_limit[t]));
    }
    res.supportable = res.user_limit > 0;
    if (res.supportable)
    {
        for (int tu = 1; tu < T; ++tu)
            for (int sd = 1; sd <= N; ++sd)
                for (int su = 1; su <= N; ++su)
                {
                    const auto t = static_cast<std::size_t>(tu - 1);
                    const int ud = limits[0][t][static_cast<std::size_t>(sd)];
                    const int uu = limits[1][t][static_cast<std::size_t>(su)];
                    if (std::min(ud, uu) == res.user_limit)
                        res.optima.push_back({tu, sd, su, L});
                }
        res.best = res.optima.front();
    }
    return res;
}

inline PlanResult optimal_configuration(const Scenario &sc, const PlanOptions &opt = {})
{
    sc.validate();
    return optimal_configuration(ChannelModel(sc.system, sc.cell), sc, opt);
}

} // namespace fwa

#endif
