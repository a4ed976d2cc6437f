// SPDX-License-Identifier: Apache-2.0
//
// Oracle suites shared by the selftest command and the acceptance binary:
// PD solver against the exhaustive grid, BD against nulling and SU-MIMO
// identities.

#ifndef FWA_VERIFY_SELFTEST_HPP
#define FWA_VERIFY_SELFTEST_HPP

#include "fwa/bd.hpp"
#include "fwa/channel.hpp"
#include "fwa/rng.hpp"
#include "fwa/scenario.hpp"
#include "fwa/verify/grid_oracle.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <random>
#include <string>
#include <vector>

namespace fwa::verify {

struct SuiteStats
{
    explicit SuiteStats(std::string suite = {}) : name(std::move(suite)) {}

    std::string name;
    int cases = 0;
    int failures = 0;
    double worst = 0.0; // worst observed error measure of the suite
    double seconds = 0.0;
    std::vector<std::string> notes; // first few failure descriptions

    bool passed() const { return cases > 0 && failures == 0; }
};

namespace detail {

inline void note(SuiteStats &st, std::string msg)
{
    if (st.notes.size() < 5)
        st.notes.push_back(std::move(msg));
}

class Stopwatch
{
  public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace detail

/// Tiny instance with <= 3 streams per subchannel and <= 2 subchannels.
/// SNR at full budget is log-uniform over [-10, 30] dB so both the
/// power-law part and the cap of the rate law are exercised.
/// `heavy` admits three streams on two subchannels (slowest oracle case).
inline PdInstance random_tiny_instance(Rng &rng, bool heavy)
{
    std::uniform_int_distribution<int> coin(0, 1);
    PdInstance in;
    in.direction = coin(rng) ? Direction::downlink : Direction::uplink;
    static constexpr int shapes[][2] = {{1, 1}, {1, 2}, {1, 3}, {2, 1}, {3, 1}};
    std::uniform_int_distribution<int> pick(0, 4);
    const auto &sh = heavy ? shapes[coin(rng) ? 2 : 4] : shapes[pick(rng)];
    in.homes = sh[0];
    in.streams = sh[1];
    if (heavy)
        in.subchannels = 2;
    else
        in.subchannels = in.homes * in.streams == 3 ? 1 : 1 + coin(rng);
    in.frame_slots = 20;
    in.slots = std::uniform_int_distribution<int>(1, 19)(rng);
    in.budget_w = in.direction == Direction::downlink ? 40.0 / 65.0 : 0.4 / in.subchannels;
    std::uniform_real_distribution<double> snr_db(-10.0, 30.0);
    in.gains.resize(static_cast<std::size_t>(in.subchannels * in.homes * in.streams));
    for (auto &g : in.gains)
        g = std::pow(10.0, snr_db(rng) / 10.0) / in.budget_w;
    return in;
}

/// Solver min rate within `tol` (relative) of the grid optimum.
inline SuiteStats pd_oracle_suite(int count, std::uint64_t seed, double tol = 0.005, int units = 10000)
{
    detail::Stopwatch clock;
    SuiteStats st{"pd-vs-grid"};
    for (int i = 0; i < count; ++i)
    {
        Rng rng = make_rng(seed, {stream::selftest, 1, static_cast<std::uint64_t>(i)});
        const auto in = random_tiny_instance(rng, i % 20 == 0);
        const auto sol = solve_pd(in);
        const double ref = grid_oracle_pd(in, units);
        const double err = ref > 0.0 ? std::abs(sol.min_rate - ref) / ref : std::abs(sol.min_rate);
        ++st.cases;
        st.worst = std::max(st.worst, err);
        if (!(err <= tol) || !sol.converged)
        {
            ++st.failures;
            detail::note(st, "case " + std::to_string(i) + ": solver " + std::to_string(sol.min_rate) + " grid " +
                                 std::to_string(ref));
        }
    }
    st.seconds = clock.seconds();
    return st;
}

struct BdSuiteStats
{
    SuiteStats residual{"bd-interference-residual"};
    SuiteStats su_mimo{"bd-su-mimo-consistency"};
    SuiteStats routes{"bd-fast-vs-svd-route"};
};

/// Random groups of baseline homes, sizes cycling over 1..N.
inline BdSuiteStats bd_suite(int count, std::uint64_t seed, double residual_tol = 1e-9, double su_tol = 1e-10,
                             double route_tol = 1e-8)
{
    detail::Stopwatch clock;
    BdSuiteStats out;
    const SystemSetting s;
    CellScenario cell;
    const ChannelModel model(s, cell);
    const double noise = noise_power(s);
    const int N = bd_user_cap(s);
    for (int i = 0; i < count; ++i)
    {
        Rng rng = make_rng(seed, {stream::selftest, 2, static_cast<std::uint64_t>(i)});
        int size = 1 + i % N;
        while (size > 1 && (size - 1) * s.home_antennas >= s.bs_antennas)
            --size;
        const auto homes = model.sample_homes(size, rng);
        const int c = std::uniform_int_distribution<int>(0, s.subchannel_count - 1)(rng);
        const int L = std::uniform_int_distribution<int>(1, s.home_antennas)(rng);
        std::vector<CMatrix> group;
        for (const auto &h : homes)
            group.push_back(model.channel(h, c));

        const auto ref = bd_precoding(group, noise, L);
        double res = 0.0;
        for (int k = 0; k < size; ++k)
            for (int j = 0; j < size; ++j)
                if (j != k)
                {
                    const auto &w = ref.precoders[static_cast<std::size_t>(k)];
                    const auto &g = group[static_cast<std::size_t>(j)];
                    res = std::max(res, (g * w).norm() / (g.norm() * w.norm()));
                }
        ++out.residual.cases;
        out.residual.worst = std::max(out.residual.worst, res);
        if (!(res < residual_tol))
        {
            ++out.residual.failures;
            detail::note(out.residual, "group " + std::to_string(i) + " residual " + std::to_string(res));
        }

        const auto fast = bd_effective_channels(group, noise, L);
        double dev = 0.0;
        for (int k = 0; k < size; ++k)
        {
            const auto &a = fast.gains[static_cast<std::size_t>(k)];
            const auto &b = ref.gains[static_cast<std::size_t>(k)];
            const double scale = b.maxCoeff();
            dev = std::max(dev, (a - b).cwiseAbs().maxCoeff() / scale);
        }
        ++out.routes.cases;
        out.routes.worst = std::max(out.routes.worst, dev);
        if (!(dev < route_tol))
        {
            ++out.routes.failures;
            detail::note(out.routes, "group " + std::to_string(i) + " deviation " + std::to_string(dev));
        }

        if (size == 1)
        {
            Eigen::JacobiSVD<CMatrix> svd(group.front());
            const Eigen::VectorXd sv = svd.singularValues();
            double rel = 0.0;
            for (int l = 0; l < L; ++l)
            {
                const double e = sv(l) * sv(l) / noise;
                rel = std::max(rel, std::abs(fast.gains.front()(l) - e) / e);
                rel = std::max(rel, std::abs(ref.gains.front()(l) - e) / e);
            }
            ++out.su_mimo.cases;
            out.su_mimo.worst = std::max(out.su_mimo.worst, rel);
            if (!(rel <= su_tol))
            {
                ++out.su_mimo.failures;
                detail::note(out.su_mimo, "group " + std::to_string(i) + " relative " + std::to_string(rel));
            }
        }
    }
    const double t = clock.seconds();
    out.residual.seconds = out.su_mimo.seconds = out.routes.seconds = t;
    return out;
}

} // namespace fwa::verify

#endif
