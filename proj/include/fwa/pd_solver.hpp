// SPDX-License-Identifier: Apache-2.0
//
// Max-min power distribution for one group over its n subchannels.
//
// Rates follow r = B_C * min(SE_max, a * (P E)^b). Time is collapsed: the same
// allocation is used in every slot of the direction, so rates carry a single
// slots / T factor and one solve serves every slot split.
//
// DL: one budget per subchannel shared by all streams of the group. Solved in
// the dual: g(w) = max_P sum_k w_k R_k(P) is convex on the simplex and its
// minimum equals the max-min rate. For fixed w the inner problem separates per
// subchannel into a capped water-filling with a closed form. The weights are
// driven by Newton steps on log-rate equalization with a backtracking search
// on g. The gap between the best dual value and the best primal min-rate is a
// certificate.
//
// UL: every (home, subchannel) pair has its own budget, so homes decouple and
// each one's rate maximization is solved exactly.

#ifndef FWA_PD_SOLVER_HPP
#define FWA_PD_SOLVER_HPP

#include "fwa/mcs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwa {

enum class Direction
{
    downlink,
    uplink
};

inline const char *to_string(Direction d) { return d == Direction::downlink ? "dl" : "ul"; }

inline constexpr double gain_floor = 1e-30;

struct PdInstance
{
    Direction direction = Direction::downlink;
    int homes = 1;
    int streams = 1;
    int subchannels = 1;
    std::vector<double> gains; // E[c][k][l], subchannel-major
    int slots = 1;             // slots of the direction
    int frame_slots = 2;       // T
    double budget_w = 1.0;     // DL: per-PRB power; UL: per-home per-PRB power
    McsApprox approx;
    double subchannel_bandwidth_hz = 360e3;

    std::size_t index(int c, int k, int l) const
    {
        return (static_cast<std::size_t>(c) * homes + k) * streams + l;
    }
    double gain(int c, int k, int l) const { return gains[index(c, k, l)]; }
    double time_fraction() const { return static_cast<double>(slots) / frame_slots; }

    void validate() const
    {
        if (homes < 1 || streams < 1 || subchannels < 1)
            throw std::invalid_argument("PdInstance: homes, streams and subchannels must be >= 1");
        if (gains.size() != static_cast<std::size_t>(homes) * streams * subchannels)
            throw std::invalid_argument("PdInstance: gain array size mismatch");
        for (double e : gains)
            if (!(e >= 0.0) || !std::isfinite(e))
                throw std::invalid_argument("PdInstance: effective channels must be finite and >= 0");
        if (!(budget_w > 0.0) || !std::isfinite(budget_w))
            throw std::invalid_argument("PdInstance: budget must be positive");
        if (slots < 1 || frame_slots < slots)
            throw std::invalid_argument("PdInstance: slots must lie in [1, T]");
        approx.validate();
        if (!(approx.b > 0.0 && approx.b < 1.0))
            throw std::invalid_argument("solve_pd: requires 0 < b < 1");
    }
};

struct PowerAllocation
{
    std::vector<double> powers;     // same layout as PdInstance::gains
    std::vector<double> home_rates; // approximate rates, bps, time fraction applied
    double min_rate = 0.0;          // lambda, bps
    double upper_bound = 0.0;       // certified bound on the optimum, bps
    double gap = 0.0;               // (upper_bound - min_rate) / upper_bound
    int iterations = 0;
    bool converged = true;
    std::vector<double> log_weights; // final dual weights, reusable as a warm start

    double power(const PdInstance &in, int c, int k, int l) const { return powers[in.index(c, k, l)]; }
};

struct RealizedRates
{
    std::vector<double> home_rates;  // bps under the practical table
    std::vector<double> prb_rates;   // per stream per PRB, bps, layout of PdInstance::gains
    std::vector<int> active_streams; // per home, streams with nonzero realized rate on some subchannel
};

struct PdOptions
{
    double tol = 1e-4;
    int max_iterations = 200;
    const std::vector<double> *warm_start = nullptr; // log weights, one per home
};

namespace detail {

/// One budget pool of the capped water-filling.
struct Pool
{
    std::vector<int> members; // stream indices into the instance layout
    double budget = 0.0;
};

struct PdEval
{
    std::vector<double> powers;
    std::vector<double> rates; // per home, per B_C, without time fraction
    double dual = 0.0;         // sum_k w_k R_k with normalized weights
    Eigen::MatrixXd jacobian;  // d log R_k / d u_j, without pseudo-rows
    std::vector<bool> sensitive;
};

class PdWorkspace
{
  public:
    PdWorkspace(const PdInstance &in) : in_(in)
    {
        const McsApprox &ap = in.approx;
        b_ = ap.b;
        s_ = 1.0 / (1.0 - b_);
        log_ab_ = std::log(ap.a * b_);
        const std::size_t m = in.gains.size();
        home_of_.resize(m);
        log_gain_.assign(m, -std::numeric_limits<double>::infinity());
        cap_power_.assign(m, 0.0);
        usable_.assign(m, false);
        const double cap_sinr = ap.cap_sinr();
        for (int c = 0; c < in.subchannels; ++c)
            for (int k = 0; k < in.homes; ++k)
                for (int l = 0; l < in.streams; ++l)
                {
                    const auto i = in.index(c, k, l);
                    home_of_[i] = k;
                    const double e = in.gains[i];
                    if (e >= gain_floor)
                    {
                        usable_[i] = true;
                        log_gain_[i] = std::log(e);
                        cap_power_[i] = cap_sinr / e;
                    }
                }
        if (in.direction == Direction::downlink)
        {
            for (int c = 0; c < in.subchannels; ++c)
            {
                Pool p;
                p.budget = in.budget_w;
                for (int k = 0; k < in.homes; ++k)
                    for (int l = 0; l < in.streams; ++l)
                        if (usable_[in.index(c, k, l)])
                            p.members.push_back(static_cast<int>(in.index(c, k, l)));
                pools_.push_back(std::move(p));
            }
        }
        else
        {
            for (int c = 0; c < in.subchannels; ++c)
                for (int k = 0; k < in.homes; ++k)
                {
                    Pool p;
                    p.budget = in.budget_w;
                    for (int l = 0; l < in.streams; ++l)
                        if (usable_[in.index(c, k, l)])
                            p.members.push_back(static_cast<int>(in.index(c, k, l)));
                    pools_.push_back(std::move(p));
                }
        }
    }

    double stream_rate(std::size_t i, double p) const
    {
        if (!usable_[i] || p <= 0.0)
            return 0.0;
        return std::min(in_.approx.se_max, in_.approx.a * std::exp(b_ * (std::log(p) + log_gain_[i])));
    }

    bool home_usable(int k) const
    {
        for (std::size_t i = 0; i < usable_.size(); ++i)
            if (home_of_[i] == k && usable_[i])
                return true;
        return false;
    }

    /// Inner maximization for log weights u (entries may be -inf).
    PdEval evaluate(const std::vector<double> &u, bool with_jacobian) const
    {
        const int K = in_.homes;
        PdEval ev;
        ev.powers.assign(in_.gains.size(), 0.0);
        ev.rates.assign(static_cast<std::size_t>(K), 0.0);
        if (with_jacobian)
            ev.jacobian = Eigen::MatrixXd::Zero(K, K);

        // per-pool scratch
        std::vector<double> lq, q, theta;
        std::vector<int> order;
        std::vector<char> capped;
        std::vector<double> share(static_cast<std::size_t>(K)), urate(static_cast<std::size_t>(K));
        std::vector<std::vector<std::pair<int, double>>> contrib; // (home, uncapped rate) per pool for jacobian
        std::vector<std::vector<double>> pool_share;
        if (with_jacobian)
        {
            contrib.resize(pools_.size());
            pool_share.resize(pools_.size());
        }

        std::vector<int> members;
        for (std::size_t pi = 0; pi < pools_.size(); ++pi)
        {
            const Pool &pool = pools_[pi];
            members.clear();
            lq.clear();
            double lq_max = -std::numeric_limits<double>::infinity();
            for (int idx : pool.members)
            {
                const auto i = static_cast<std::size_t>(idx);
                const double uk = u[static_cast<std::size_t>(home_of_[i])];
                if (std::isinf(uk))
                    continue;
                members.push_back(idx);
                lq.push_back(s_ * (uk + log_ab_ + b_ * log_gain_[i]));
                lq_max = std::max(lq_max, lq.back());
            }
            const std::size_t m = members.size();
            if (m == 0)
                continue;
            double cap_sum = 0.0;
            for (int idx : members)
                cap_sum += cap_power_[static_cast<std::size_t>(idx)];

            capped.assign(m, 0);
            if (cap_sum <= pool.budget)
            {
                for (int idx : members)
                    ev.powers[static_cast<std::size_t>(idx)] = cap_power_[static_cast<std::size_t>(idx)];
                continue;
            }

            q.resize(m);
            theta.resize(m);
            for (std::size_t j = 0; j < m; ++j)
            {
                q[j] = std::exp(lq[j] - lq_max);
                const auto i = static_cast<std::size_t>(members[j]);
                theta[j] = q[j] > 0.0 ? cap_power_[i] / q[j] : std::numeric_limits<double>::infinity();
            }
            order.resize(m);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                return theta[static_cast<std::size_t>(x)] < theta[static_cast<std::size_t>(y)];
            });
            double q_rest = 0.0;
            for (double v : q)
                q_rest += v;
            double capped_power = 0.0;
            double level = 0.0;
            std::size_t ncap = 0;
            for (; ncap < m; ++ncap)
            {
                const auto j = static_cast<std::size_t>(order[ncap]);
                if (q_rest <= 0.0)
                    break;
                level = (pool.budget - capped_power) / q_rest;
                if (level <= theta[j])
                    break;
                capped_power += cap_power_[static_cast<std::size_t>(members[j])];
                q_rest -= q[j];
                if (q_rest < 0.0)
                    q_rest = 0.0;
            }
            for (std::size_t r = 0; r < ncap; ++r)
                capped[static_cast<std::size_t>(order[r])] = 1;
            // Recompute from scratch; the running difference loses precision.
            capped_power = 0.0;
            q_rest = 0.0;
            for (std::size_t j = 0; j < m; ++j)
            {
                if (capped[j])
                    capped_power += cap_power_[static_cast<std::size_t>(members[j])];
                else
                    q_rest += q[j];
            }
            level = q_rest > 0.0 ? std::max(pool.budget - capped_power, 0.0) / q_rest : 0.0;

            if (with_jacobian)
            {
                std::fill(share.begin(), share.end(), 0.0);
                std::fill(urate.begin(), urate.end(), 0.0);
            }
            double q_unc = 0.0;
            for (std::size_t j = 0; j < m; ++j)
            {
                const auto i = static_cast<std::size_t>(members[j]);
                if (capped[j])
                    ev.powers[i] = cap_power_[i];
                else
                {
                    ev.powers[i] = q[j] * level;
                    if (with_jacobian && ev.powers[i] > 0.0)
                    {
                        const auto k = static_cast<std::size_t>(home_of_[i]);
                        share[k] += q[j];
                        q_unc += q[j];
                        urate[k] += stream_rate(i, ev.powers[i]);
                    }
                }
            }
            if (with_jacobian && q_unc > 0.0)
            {
                auto &ps = pool_share[pi];
                ps.assign(static_cast<std::size_t>(K), 0.0);
                for (int k = 0; k < K; ++k)
                {
                    ps[static_cast<std::size_t>(k)] = share[static_cast<std::size_t>(k)] / q_unc;
                    if (urate[static_cast<std::size_t>(k)] > 0.0)
                        contrib[pi].emplace_back(k, urate[static_cast<std::size_t>(k)]);
                }
            }
        }

        for (std::size_t i = 0; i < ev.powers.size(); ++i)
            ev.rates[static_cast<std::size_t>(home_of_[i])] += stream_rate(i, ev.powers[i]);

        double wsum = 0.0, umax = -std::numeric_limits<double>::infinity();
        for (double v : u)
            umax = std::max(umax, v);
        for (int k = 0; k < K; ++k)
            wsum += std::exp(u[static_cast<std::size_t>(k)] - umax);
        for (int k = 0; k < K; ++k)
            ev.dual += std::exp(u[static_cast<std::size_t>(k)] - umax) / wsum * ev.rates[static_cast<std::size_t>(k)];

        if (with_jacobian)
        {
            ev.sensitive.assign(static_cast<std::size_t>(K), false);
            const double sb = s_ * b_;
            for (std::size_t pi = 0; pi < pools_.size(); ++pi)
                for (const auto &[k, uk] : contrib[pi])
                {
                    const double rk = ev.rates[static_cast<std::size_t>(k)];
                    if (rk <= 0.0)
                        continue;
                    const double f = sb * uk / rk;
                    ev.sensitive[static_cast<std::size_t>(k)] = true;
                    ev.jacobian(k, k) += f;
                    for (int j = 0; j < K; ++j)
                        ev.jacobian(k, j) -= f * pool_share[pi][static_cast<std::size_t>(j)];
                }
        }
        return ev;
    }

    double sb() const { return s_ * b_; }

    std::vector<double> rates_of(const std::vector<double> &powers) const
    {
        std::vector<double> r(static_cast<std::size_t>(in_.homes), 0.0);
        for (std::size_t i = 0; i < powers.size(); ++i)
            r[static_cast<std::size_t>(home_of_[i])] += stream_rate(i, powers[i]);
        return r;
    }

  private:
    const PdInstance &in_;
    double b_ = 0.5, s_ = 2.0, log_ab_ = 0.0;
    std::vector<int> home_of_;
    std::vector<double> log_gain_;
    std::vector<double> cap_power_;
    std::vector<bool> usable_;
    std::vector<Pool> pools_;
};

inline double min_of(const std::vector<double> &v) { return *std::min_element(v.begin(), v.end()); }

/// Value of the matrix game max_lambda min_k sum_j lambda_j cols[j][k] with
/// lambda and w on their simplices. Solved as max 1'x s.t. M x <= 1 on the
/// shifted, scaled payoffs with Bland's rule; lambda is read from the duals.
inline double solve_game(const std::vector<std::vector<double>> &cols, std::vector<double> &lambda,
                         std::vector<double> &w)
{
    const std::size_t J = cols.size(), K = cols.front().size();
    double top = 0.0;
    for (const auto &c : cols)
        for (double v : c)
            top = std::max(top, v);
    if (!(top > 0.0))
    {
        lambda.assign(J, 1.0 / static_cast<double>(J));
        w.assign(K, 1.0 / static_cast<double>(K));
        return 0.0;
    }
    const double shift = 1e-3;
    const std::size_t width = K + J + 1;
    std::vector<double> t(J * width, 0.0), obj(K + J, 0.0);
    std::vector<std::size_t> basis(J);
    for (std::size_t j = 0; j < J; ++j)
    {
        for (std::size_t k = 0; k < K; ++k)
            t[j * width + k] = cols[j][k] / top + shift;
        t[j * width + K + j] = 1.0;
        t[j * width + K + J] = 1.0;
        basis[j] = K + j;
    }
    for (std::size_t k = 0; k < K; ++k)
        obj[k] = -1.0;
    double z = 0.0;
    const double eps = 1e-12;
    for (std::size_t guard = 0; guard < 50 * (J + K); ++guard)
    {
        std::size_t enter = K + J;
        for (std::size_t c = 0; c < K + J; ++c)
            if (obj[c] < -eps)
            {
                enter = c;
                break;
            }
        if (enter == K + J)
            break;
        std::size_t leave = J;
        double ratio = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < J; ++j)
        {
            const double a = t[j * width + enter];
            if (a > eps)
            {
                const double r = t[j * width + K + J] / a;
                if (r < ratio - eps || (r <= ratio + eps && leave < J && basis[j] < basis[leave]))
                {
                    ratio = r;
                    leave = j;
                }
            }
        }
        if (leave == J)
            break; // unbounded cannot occur with positive payoffs
        const double piv = t[leave * width + enter];
        for (std::size_t c = 0; c < width; ++c)
            t[leave * width + c] /= piv;
        for (std::size_t j = 0; j < J; ++j)
            if (j != leave)
            {
                const double f = t[j * width + enter];
                if (f != 0.0)
                    for (std::size_t c = 0; c < width; ++c)
                        t[j * width + c] -= f * t[leave * width + c];
            }
        const double f = obj[enter];
        for (std::size_t c = 0; c < K + J; ++c)
            obj[c] -= f * t[leave * width + c];
        z -= f * t[leave * width + K + J];
        basis[leave] = enter;
    }
    w.assign(K, 0.0);
    for (std::size_t j = 0; j < J; ++j)
        if (basis[j] < K)
            w[basis[j]] = t[j * width + K + J];
    lambda.assign(J, 0.0);
    double ly = 0.0, lw = 0.0;
    for (std::size_t j = 0; j < J; ++j)
    {
        lambda[j] = std::max(obj[K + j], 0.0);
        ly += lambda[j];
    }
    for (double v : w)
        lw += v;
    for (auto &v : lambda)
        v = ly > 0.0 ? v / ly : 1.0 / static_cast<double>(J);
    for (auto &v : w)
        v = lw > 0.0 ? v / lw : 1.0 / static_cast<double>(K);
    return z > 0.0 ? (1.0 / z - shift) * top : 0.0;
}

} // namespace detail

/// Solves the max-min program. Non-convergence is reported through
/// `converged` and `gap` on the best feasible point found.
inline PowerAllocation solve_pd(const PdInstance &in, const PdOptions &opt = {})
{
    in.validate();
    const int K = in.homes;
    const double scale = in.subchannel_bandwidth_hz * in.time_fraction();
    detail::PdWorkspace ws(in);

    auto finish = [&](const detail::PdEval &ev, double upper, int iters, std::vector<double> u) {
        PowerAllocation out;
        out.powers = ev.powers;
        out.home_rates.resize(ev.rates.size());
        for (std::size_t k = 0; k < ev.rates.size(); ++k)
            out.home_rates[k] = ev.rates[k] * scale;
        const double lo = detail::min_of(ev.rates);
        out.min_rate = lo * scale;
        out.upper_bound = std::max(upper, lo) * scale;
        out.gap = upper > 0.0 ? std::max(0.0, (upper - lo) / upper) : 0.0;
        out.converged = out.gap <= opt.tol;
        out.iterations = iters;
        out.log_weights = std::move(u);
        return out;
    };

    std::vector<double> u(static_cast<std::size_t>(K), 0.0);

    if (in.direction == Direction::uplink)
    {
        auto ev = ws.evaluate(u, false);
        return finish(ev, detail::min_of(ev.rates), 0, u);
    }

    // Dual values at the simplex vertices: home k alone with the whole budget.
    double upper = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k)
    {
        if (!ws.home_usable(k))
        {
            upper = 0.0;
            break;
        }
        std::vector<double> uk(static_cast<std::size_t>(K), -std::numeric_limits<double>::infinity());
        uk[static_cast<std::size_t>(k)] = 0.0;
        upper = std::min(upper, ws.evaluate(uk, false).rates[static_cast<std::size_t>(k)]);
    }
    if (K == 1 || upper <= 0.0)
    {
        auto ev = ws.evaluate(u, false);
        return finish(ev, upper, 0, u);
    }

    if (opt.warm_start && opt.warm_start->size() == u.size())
    {
        u = *opt.warm_start;
        for (double &v : u)
            if (!std::isfinite(v))
                v = -50.0;
    }

    auto ev = ws.evaluate(u, true);
    detail::PdEval best = ev;
    double best_lo = detail::min_of(ev.rates);
    std::vector<double> best_u = u;
    upper = std::min(upper, ev.dual);
    // Inner maximizers seen so far: columns of the cutting-plane master.
    std::vector<std::vector<double>> col_rates{ev.rates}, col_powers{ev.powers};

    const double sb = ws.sb();
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter)
    {
        if (upper <= 0.0 || (upper - best_lo) / upper <= opt.tol)
            break;

        // F_k = log R_k; Newton on F + M d = tau 1 with gauge sum(d) = 0.
        Eigen::VectorXd f(K);
        for (int k = 0; k < K; ++k)
            f(k) = std::log(std::max(ev.rates[static_cast<std::size_t>(k)], 1e-300));

        auto direction_from = [&](bool diagonal) {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(K + 1, K + 1);
            for (int k = 0; k < K; ++k)
            {
                if (diagonal || !ev.sensitive[static_cast<std::size_t>(k)] || ev.jacobian(k, k) < 1e-12 * sb)
                {
                    a(k, k) = sb;
                }
                else
                    a.block(k, 0, 1, K) = ev.jacobian.row(k);
                a(k, K) = -1.0;
                a(K, k) = 1.0;
            }
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K + 1);
            rhs.head(K) = -f;
            Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
            Eigen::VectorXd d = sol.head(K);
            if (!d.allFinite())
                d.setZero();
            const double dmax = d.cwiseAbs().maxCoeff();
            if (dmax > 8.0)
                d *= 8.0 / dmax;
            return d;
        };

        bool moved = false;
        for (int attempt = 0; attempt < 2 && !moved; ++attempt)
        {
            const Eigen::VectorXd d = direction_from(attempt == 1);
            if (d.cwiseAbs().maxCoeff() < 1e-14)
                continue;
            double step = 1.0;
            for (int ls = 0; ls < 30; ++ls, step *= 0.5)
            {
                std::vector<double> trial(u);
                for (int k = 0; k < K; ++k)
                    trial[static_cast<std::size_t>(k)] += step * d(k);
                auto tev = ws.evaluate(trial, true);
                const double tlo = detail::min_of(tev.rates);
                if (tlo > best_lo)
                {
                    best_lo = tlo;
                    best = tev;
                    best_u = trial;
                }
                upper = std::min(upper, tev.dual);
                if (tev.dual < ev.dual * (1.0 - 1e-15) || tlo > detail::min_of(ev.rates) * (1.0 + 1e-12))
                {
                    u = std::move(trial);
                    ev = std::move(tev);
                    col_rates.push_back(ev.rates);
                    col_powers.push_back(ev.powers);
                    moved = true;
                    break;
                }
            }
        }
        if (!moved)
            break;
        // keep weights bounded: gauge by the max
        const double umax = *std::max_element(u.begin(), u.end());
        for (double &v : u)
            v = std::max(v - umax, -700.0);
    }

    // Newton equalization stalls when homes sit at kinks (capped streams or
    // rates strictly above the optimum). Fall back to the master over convex
    // mixes of inner maximizers, priced by the game's weights. Rates are
    // concave in power, so a mix does at least as well as the master value.
    // Pricing is stabilized toward the weights with the best dual value.
    std::vector<double> center(static_cast<std::size_t>(K));
    {
        const double umax = *std::max_element(u.begin(), u.end());
        double sum = 0.0;
        for (int k = 0; k < K; ++k)
            sum += center[static_cast<std::size_t>(k)] = std::exp(u[static_cast<std::size_t>(k)] - umax);
        for (double &v : center)
            v /= sum;
    }
    double center_dual = ev.dual;
    for (int round = 0; round < opt.max_iterations; ++round)
    {
        if (upper <= 0.0 || (upper - best_lo) / upper <= opt.tol)
            break;
        std::vector<double> lambda, w;
        const double model = detail::solve_game(col_rates, lambda, w);
        if (col_rates.size() > 96)
        {
            // Keep the master small: active columns plus the newest ones.
            std::vector<std::vector<double>> kr, kp;
            std::vector<double> kl;
            for (std::size_t j = 0; j < col_rates.size(); ++j)
                if (lambda[j] > 0.0 || j + 32 >= col_rates.size())
                {
                    kr.push_back(std::move(col_rates[j]));
                    kp.push_back(std::move(col_powers[j]));
                    kl.push_back(lambda[j]);
                }
            col_rates = std::move(kr);
            col_powers = std::move(kp);
            lambda = std::move(kl);
        }
        std::vector<double> mix(in.gains.size(), 0.0);
        for (std::size_t j = 0; j < lambda.size(); ++j)
            if (lambda[j] > 0.0)
                for (std::size_t i = 0; i < mix.size(); ++i)
                    mix[i] += lambda[j] * col_powers[j][i];
        auto rates = ws.rates_of(mix);
        const double lo = detail::min_of(rates);
        ++iter;
        std::vector<double> uw(w.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            uw[k] = w[k] > 0.0 ? std::log(w[k]) : -std::numeric_limits<double>::infinity();
        if (lo > best_lo)
        {
            best_lo = lo;
            best.powers = std::move(mix);
            best.rates = std::move(rates);
            best_u = uw;
            for (double &v : best_u)
                v = std::isfinite(v) ? v : -50.0;
        }
        if ((upper - best_lo) / upper <= opt.tol || model >= upper * (1.0 - 1e-12))
            break;
        // Cut at the master weights (Kelley) and at the stabilized point.
        auto mev = ws.evaluate(uw, false);
        upper = std::min(upper, mev.dual);
        col_rates.push_back(std::move(mev.rates));
        col_powers.push_back(std::move(mev.powers));
        std::vector<double> wp(w.size());
        for (std::size_t k = 0; k < w.size(); ++k)
        {
            wp[k] = 0.5 * (w[k] + center[k]);
            uw[k] = wp[k] > 0.0 ? std::log(wp[k]) : -std::numeric_limits<double>::infinity();
        }
        auto pev = ws.evaluate(uw, false);
        upper = std::min(upper, pev.dual);
        if (pev.dual < center_dual)
        {
            center_dual = pev.dual;
            center = wp;
        }
        col_rates.push_back(std::move(pev.rates));
        col_powers.push_back(std::move(pev.powers));
    }
    return finish(best, upper, iter, best_u);
}

/// Maps an allocation through the practical MCS table.
inline RealizedRates realized_rates(const PowerAllocation &alloc, const PdInstance &in, const McsTable &table)
{
    RealizedRates out;
    out.home_rates.assign(static_cast<std::size_t>(in.homes), 0.0);
    out.prb_rates.assign(in.gains.size(), 0.0);
    out.active_streams.assign(static_cast<std::size_t>(in.homes), 0);
    std::vector<char> active(static_cast<std::size_t>(in.homes * in.streams), 0);
    for (int c = 0; c < in.subchannels; ++c)
        for (int k = 0; k < in.homes; ++k)
            for (int l = 0; l < in.streams; ++l)
            {
                const auto i = in.index(c, k, l);
                const double e = in.gains[i] < gain_floor ? 0.0 : in.gains[i];
                const double r = in.subchannel_bandwidth_hz * table.se(alloc.powers[i] * e);
                out.prb_rates[i] = r;
                out.home_rates[static_cast<std::size_t>(k)] += r;
                if (r > 0.0)
                    active[static_cast<std::size_t>(k * in.streams + l)] = 1;
            }
    const double tf = in.time_fraction();
    for (int k = 0; k < in.homes; ++k)
    {
        out.home_rates[static_cast<std::size_t>(k)] *= tf;
        for (int l = 0; l < in.streams; ++l)
            out.active_streams[static_cast<std::size_t>(k)] += active[static_cast<std::size_t>(k * in.streams + l)];
    }
    return out;
}

/// True iff every home reaches the MBR. An empty group passes vacuously.
inline bool group_meets_mbr(const RealizedRates &rates, double mbr_bps)
{
    return std::all_of(rates.home_rates.begin(), rates.home_rates.end(), [&](double r) { return r >= mbr_bps; });
}

} // namespace fwa

#endif
