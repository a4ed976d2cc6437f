// SPDX-License-Identifier: Apache-2.0
//
// Practical SINR -> spectral-efficiency table, its continuous power-law
// approximation, and the cap-rate lower bound on subchannels per home.

#ifndef FWA_MCS_HPP
#define FWA_MCS_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fwa {

struct McsLevel
{
    double sinr_db;
    double sinr_linear;
    double se_bps_hz;
};

/// Piecewise-constant MCS function. Thresholds are inclusive lower bounds:
/// gamma_q <= sinr < gamma_{q+1} maps to SE_q, sinr < gamma_1 maps to 0.
class McsTable
{
  public:
    McsTable() = default;

    explicit McsTable(const std::vector<std::pair<double, double>> &db_se)
    {
        if (db_se.empty())
            throw std::invalid_argument("MCS table must contain at least one level");
        levels_.reserve(db_se.size());
        for (const auto &[db, se] : db_se)
        {
            if (!std::isfinite(db) || !std::isfinite(se) || se <= 0.0)
                throw std::invalid_argument("MCS table entries must be finite with positive SE");
            if (!levels_.empty() && (db <= levels_.back().sinr_db || se <= levels_.back().se_bps_hz))
                throw std::invalid_argument("MCS table thresholds and SE values must be strictly increasing");
            levels_.push_back({db, std::pow(10.0, db / 10.0), se});
        }
    }

    /// The 15-level 64-QAM table used for both directions.
    static McsTable standard()
    {
        return McsTable({{-6.5, 0.14}, {-4.0, 0.22}, {-2.6, 0.36}, {-1.0, 0.56}, {1.0, 0.82},
                         {3.0, 1.10}, {6.6, 1.38}, {10.0, 1.78}, {11.4, 2.25}, {11.8, 2.55},
                         {13.0, 3.10}, {13.8, 3.64}, {15.6, 4.22}, {16.8, 4.78}, {17.6, 5.18}});
    }

    /// Reads "sinr_db,se_bps_hz" rows; a non-numeric first row is a header.
    static McsTable load(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open MCS table file: " + path.string());
        std::vector<std::pair<double, double>> rows;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream fields(line);
            double db = 0.0, se = 0.0;
            if (!(fields >> db >> se))
            {
                if (rows.empty() && line_no == 1)
                    continue;
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": expected 'sinr_db,se_bps_hz'");
            }
            rows.emplace_back(db, se);
        }
        return McsTable(rows);
    }

    double se(double sinr_linear) const
    {
        auto it = std::upper_bound(levels_.begin(), levels_.end(), sinr_linear,
                                   [](double s, const McsLevel &l) { return s < l.sinr_linear; });
        if (it == levels_.begin())
            return 0.0;
        return std::prev(it)->se_bps_hz;
    }

    double se_max() const { return levels_.empty() ? 0.0 : levels_.back().se_bps_hz; }
    double first_threshold_linear() const { return levels_.empty() ? 0.0 : levels_.front().sinr_linear; }
    double r_max(double subchannel_bandwidth_hz) const { return subchannel_bandwidth_hz * se_max(); }
    std::size_t size() const { return levels_.size(); }
    const std::vector<McsLevel> &levels() const { return levels_; }

    std::string to_csv() const
    {
        auto shortest = [](double v) {
            char buf[32];
            return std::string(buf, std::to_chars(buf, buf + sizeof(buf), v).ptr);
        };
        std::string out = "sinr_db,se_bps_hz\n";
        for (const auto &l : levels_)
            out += shortest(l.sinr_db) + ',' + shortest(l.se_bps_hz) + '\n';
        return out;
    }

    bool operator==(const McsTable &other) const
    {
        if (levels_.size() != other.levels_.size())
            return false;
        for (std::size_t i = 0; i < levels_.size(); ++i)
            if (levels_[i].sinr_db != other.levels_[i].sinr_db || levels_[i].se_bps_hz != other.levels_[i].se_bps_hz)
                return false;
        return true;
    }

  private:
    std::vector<McsLevel> levels_;
};

/// r = B_C * min(se_max, a * sinr^b). Concave in power for 0 <= b <= 1.
struct McsApprox
{
    double a = 0.648;
    double b = 0.5;
    double se_max = 5.18;

    void validate() const
    {
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("MCS approximation requires a > 0");
        if (!(b >= 0.0 && b <= 1.0))
            throw std::invalid_argument("MCS approximation requires 0 <= b <= 1");
        if (!(se_max > 0.0) || !std::isfinite(se_max))
            throw std::invalid_argument("MCS approximation requires se_max > 0");
    }

    /// SINR at which the power law reaches se_max.
    double cap_sinr() const { return std::pow(se_max / a, 1.0 / b); }

    bool operator==(const McsApprox &) const = default;
};

inline double se_practical(double sinr_linear, const McsTable &table) { return table.se(sinr_linear); }

inline double rate_approx(double power_w, double effective_channel, const McsApprox &approx,
                          double subchannel_bandwidth_hz)
{
    const double sinr = power_w * effective_channel;
    if (sinr <= 0.0)
        return 0.0;
    return subchannel_bandwidth_hz * std::min(approx.se_max, approx.a * std::pow(sinr, approx.b));
}

/// Fewest subchannels that could carry `mbr_bps` if every stream ran at the top MCS level.
inline int c_min(double mbr_bps, double subchannel_bandwidth_hz, int streams, double se_max)
{
    if (mbr_bps <= 0.0)
        return 1;
    const double ratio = mbr_bps / (subchannel_bandwidth_hz * streams * se_max);
    // Absorb rounding when the ratio is an exact integer in real arithmetic.
    const int n = static_cast<int>(std::ceil(ratio * (1.0 - 1e-12)));
    return std::max(n, 1);
}

} // namespace fwa

#endif
