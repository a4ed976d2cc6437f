// SPDX-License-Identifier: Apache-2.0
//
// System setting, cell scenario, configuration records and the scenario file
// reader/writer. Scenario files are INI-style: `[section]` headers followed by
// `key = value` lines, with units spelled out in the key names.

#ifndef FWA_SCENARIO_HPP
#define FWA_SCENARIO_HPP

#include "fwa/mcs.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fwa {

inline constexpr double speed_of_light_mps = 3.0e8;

class ScenarioError : public std::runtime_error
{
  public:
    ScenarioError(std::string field, const std::string &rule)
        : std::runtime_error(field + ": " + rule), field_(std::move(field))
    {
    }
    const std::string &field() const { return field_; }

  private:
    std::string field_;
};

namespace detail {
inline bool is_perfect_square(int m)
{
    if (m < 1)
        return false;
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    return r * r == m;
}

// UPA sizes: q^2 (square) or 2 q^2 (q x 2q).
inline bool is_upa_size(int m) { return is_perfect_square(m) || (m % 2 == 0 && is_perfect_square(m / 2)); }
} // namespace detail

struct SystemSetting
{
    double carrier_frequency_hz = 3.5e9;
    double bandwidth_hz = 25e6;
    int subchannel_count = 65;
    double subchannel_bandwidth_hz = 360e3;
    int slots_per_frame = 20;
    double slot_duration_s = 0.5e-3;
    double bs_power_w = 40.0;
    double home_power_w = 0.4;
    int bs_antennas = 64;
    int home_antennas = 4;
    double mbr_dl_bps = 30e6;
    double mbr_ul_bps = 5e6;
    double noise_density_dbm_hz = -174.0;
    double noise_figure_db = 9.0;

    double wavelength_m() const { return speed_of_light_mps / carrier_frequency_hz; }

    void validate() const
    {
        auto positive = [](const char *name, double v) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ScenarioError(name, "must be finite and strictly positive");
        };
        positive("carrier_frequency_hz", carrier_frequency_hz);
        positive("bandwidth_hz", bandwidth_hz);
        positive("subchannel_bandwidth_hz", subchannel_bandwidth_hz);
        positive("slot_duration_s", slot_duration_s);
        positive("bs_power_w", bs_power_w);
        positive("home_power_w", home_power_w);
        positive("mbr_dl_bps", mbr_dl_bps);
        positive("mbr_ul_bps", mbr_ul_bps);
        if (!std::isfinite(noise_density_dbm_hz))
            throw ScenarioError("noise_density_dbm_hz", "must be finite");
        if (!std::isfinite(noise_figure_db))
            throw ScenarioError("noise_figure_db", "must be finite");
        if (subchannel_count < 1)
            throw ScenarioError("subchannel_count", "must be >= 1");
        if (slots_per_frame < 2)
            throw ScenarioError("slots_per_frame", "must be >= 2");
        if (!detail::is_upa_size(bs_antennas))
            throw ScenarioError("bs_antennas", "must be q^2 or 2 q^2 (UPA)");
        if (!detail::is_upa_size(home_antennas))
            throw ScenarioError("home_antennas", "must be q^2 or 2 q^2 (UPA)");
        if (home_antennas > bs_antennas)
            throw ScenarioError("home_antennas", "must not exceed bs_antennas");
    }

    bool operator==(const SystemSetting &) const = default;
};

struct CellScenario
{
    double radius_m = 1500.0;
    double min_distance_m = 35.0;
    double bs_height_m = 100.0;
    double home_height_m = 5.0;
    double building_height_m = 5.0;
    double bs_antenna_spacing_wavelengths = 0.5;
    double home_antenna_spacing_m = 0.2;
    double bs_correlation = 0.4;
    double home_correlation = 0.01;
    double rician_mean_db = 7.0;
    double rician_std_db = 4.0;
    bool shadowing = true;
    double shadowing_std_db = 4.0;
    int realization_count = 100;
    double feasibility_quantile = 0.95;

    void validate() const
    {
        auto positive = [](const char *name, double v) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ScenarioError(name, "must be finite and strictly positive");
        };
        positive("radius_m", radius_m);
        positive("min_distance_m", min_distance_m);
        positive("bs_height_m", bs_height_m);
        positive("home_height_m", home_height_m);
        positive("building_height_m", building_height_m);
        positive("bs_antenna_spacing_wavelengths", bs_antenna_spacing_wavelengths);
        positive("home_antenna_spacing_m", home_antenna_spacing_m);
        if (!(min_distance_m < radius_m))
            throw ScenarioError("min_distance_m", "must be smaller than radius_m");
        if (!(bs_correlation >= 0.0 && bs_correlation <= 1.0))
            throw ScenarioError("bs_correlation", "must lie in [0, 1]");
        if (!(home_correlation >= 0.0 && home_correlation <= 1.0))
            throw ScenarioError("home_correlation", "must lie in [0, 1]");
        if (!std::isfinite(rician_mean_db))
            throw ScenarioError("rician_mean_db", "must be finite");
        if (!(rician_std_db >= 0.0) || !std::isfinite(rician_std_db))
            throw ScenarioError("rician_std_db", "must be finite and >= 0");
        if (!(shadowing_std_db >= 0.0) || !std::isfinite(shadowing_std_db))
            throw ScenarioError("shadowing_std_db", "must be finite and >= 0");
        if (realization_count < 1)
            throw ScenarioError("realization_count", "must be >= 1");
        if (!(feasibility_quantile > 0.0 && feasibility_quantile <= 1.0))
            throw ScenarioError("feasibility_quantile", "must lie in (0, 1]");
    }

    bool operator==(const CellScenario &) const = default;
};

/// N = ceil(M_BS / M_H): most homes block diagonalization can co-schedule on one PRB.
inline int bd_user_cap(const SystemSetting &s) { return (s.bs_antennas + s.home_antennas - 1) / s.home_antennas; }

/// Noise power over one subchannel, in watts.
inline double noise_power(const SystemSetting &s)
{
    const double dbm = s.noise_density_dbm_hz + s.noise_figure_db + 10.0 * std::log10(s.subchannel_bandwidth_hz);
    return std::pow(10.0, dbm / 10.0) / 1000.0;
}

/// DL per-PRB power. Always P_max / C with C the system subchannel count.
inline double prb_power_dl(const SystemSetting &s) { return s.bs_power_w / s.subchannel_count; }

struct Configuration
{
    int ul_slots = 10;
    int dl_group_size = 1;
    int ul_group_size = 1;
    int streams = 1;

    int dl_slots(const SystemSetting &s) const { return s.slots_per_frame - ul_slots; }

    void validate(const SystemSetting &s) const
    {
        const int cap = bd_user_cap(s);
        if (ul_slots < 1 || ul_slots > s.slots_per_frame - 1)
            throw ScenarioError("ul_slots", "must lie in [1, " + std::to_string(s.slots_per_frame - 1) + "]");
        if (dl_group_size < 1 || dl_group_size > cap)
            throw ScenarioError("dl_group_size", "must lie in [1, " + std::to_string(cap) + "]");
        if (ul_group_size < 1 || ul_group_size > cap)
            throw ScenarioError("ul_group_size", "must lie in [1, " + std::to_string(cap) + "]");
        if (streams < 1 || streams > s.home_antennas)
            throw ScenarioError("streams", "must lie in [1, " + std::to_string(s.home_antennas) + "]");
    }

    bool operator==(const Configuration &) const = default;
};

struct Scenario
{
    SystemSetting system;
    CellScenario cell;
    McsApprox approx;
    McsTable table = McsTable::standard();
    std::string mcs_table_file; // empty: built-in table
    std::optional<Configuration> configuration;
    std::uint64_t seed = 1;

    void validate() const
    {
        system.validate();
        cell.validate();
        approx.validate();
        if (configuration)
            configuration->validate(system);
    }

    bool operator==(const Scenario &other) const
    {
        return system == other.system && cell == other.cell && approx == other.approx && table == other.table &&
               configuration == other.configuration && seed == other.seed;
    }
};

namespace detail {

using Ptree = boost::property_tree::ptree;

inline std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v); // shortest round-trip form
    return std::string(buf, end);
}

class SectionReader
{
  public:
    SectionReader(const Ptree &root, std::string section) : section_(std::move(section))
    {
        if (auto child = root.get_child_optional(section_))
            node_ = &*child;
    }

    bool present() const { return node_ != nullptr; }

    void read(const char *key, double &out)
    {
        if (auto text = fetch(key))
        {
            try
            {
                std::size_t used = 0;
                out = std::stod(*text, &used);
                if (used != text->size())
                    throw std::invalid_argument("trailing");
            }
            catch (const std::exception &)
            {
                throw ScenarioError(qualified(key), "expected a number, got '" + *text + "'");
            }
        }
    }

    void read(const char *key, int &out)
    {
        double v = out;
        read(key, v);
        if (v != std::floor(v) || std::abs(v) > 1e9)
            throw ScenarioError(qualified(key), "expected an integer");
        out = static_cast<int>(v);
    }

    void read(const char *key, std::uint64_t &out)
    {
        if (auto text = fetch(key))
        {
            auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), out);
            if (ec != std::errc() || ptr != text->data() + text->size())
                throw ScenarioError(qualified(key), "expected an unsigned integer");
        }
    }

    void read(const char *key, bool &out)
    {
        if (auto text = fetch(key))
        {
            if (*text == "true" || *text == "on" || *text == "1")
                out = true;
            else if (*text == "false" || *text == "off" || *text == "0")
                out = false;
            else
                throw ScenarioError(qualified(key), "expected true/false");
        }
    }

    void read(const char *key, std::string &out)
    {
        if (auto text = fetch(key))
            out = *text;
    }

    void reject_unknown() const
    {
        if (!node_)
            return;
        for (const auto &[key, value] : *node_)
            if (!seen_.count(key))
                throw ScenarioError(qualified(key.c_str()), "unknown key");
    }

  private:
    std::optional<std::string> fetch(const char *key)
    {
        seen_.insert(key);
        if (!node_)
            return std::nullopt;
        auto v = node_->get_optional<std::string>(key);
        if (!v)
            return std::nullopt;
        auto text = *v;
        text.erase(0, text.find_first_not_of(" \t"));
        text.erase(text.find_last_not_of(" \t\r") + 1);
        return text;
    }

    std::string qualified(const char *key) const { return section_ + "." + key; }

    std::string section_;
    const Ptree *node_ = nullptr;
    std::set<std::string> seen_;
};

template <class Visitor>
void visit_system(SystemSetting &s, Visitor &&v)
{
    v("carrier_frequency_hz", s.carrier_frequency_hz);
    v("bandwidth_hz", s.bandwidth_hz);
    v("subchannel_count", s.subchannel_count);
    v("subchannel_bandwidth_hz", s.subchannel_bandwidth_hz);
    v("slots_per_frame", s.slots_per_frame);
    v("slot_duration_s", s.slot_duration_s);
    v("bs_power_w", s.bs_power_w);
    v("home_power_w", s.home_power_w);
    v("bs_antennas", s.bs_antennas);
    v("home_antennas", s.home_antennas);
    v("mbr_dl_bps", s.mbr_dl_bps);
    v("mbr_ul_bps", s.mbr_ul_bps);
    v("noise_density_dbm_hz", s.noise_density_dbm_hz);
    v("noise_figure_db", s.noise_figure_db);
}

template <class Visitor>
void visit_cell(CellScenario &c, Visitor &&v)
{
    v("radius_m", c.radius_m);
    v("min_distance_m", c.min_distance_m);
    v("bs_height_m", c.bs_height_m);
    v("home_height_m", c.home_height_m);
    v("building_height_m", c.building_height_m);
    v("bs_antenna_spacing_wavelengths", c.bs_antenna_spacing_wavelengths);
    v("home_antenna_spacing_m", c.home_antenna_spacing_m);
    v("bs_correlation", c.bs_correlation);
    v("home_correlation", c.home_correlation);
    v("rician_mean_db", c.rician_mean_db);
    v("rician_std_db", c.rician_std_db);
    v("shadowing", c.shadowing);
    v("shadowing_std_db", c.shadowing_std_db);
    v("realization_count", c.realization_count);
    v("feasibility_quantile", c.feasibility_quantile);
}

template <class Visitor>
void visit_configuration(Configuration &c, Visitor &&v)
{
    v("ul_slots", c.ul_slots);
    v("dl_group_size", c.dl_group_size);
    v("ul_group_size", c.ul_group_size);
    v("streams", c.streams);
}

} // namespace detail

/// Parses scenario text. Missing keys keep their baseline defaults; unknown
/// keys and sections are errors. `base_dir` resolves a relative MCS table path.
inline Scenario parse_scenario(const std::string &text, const std::filesystem::path &base_dir = {})
{
    detail::Ptree root;
    try
    {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, root);
    }
    catch (const boost::property_tree::ini_parser_error &e)
    {
        throw ScenarioError("<file>", std::string("parse failure: ") + e.message() + " (line " +
                                          std::to_string(e.line()) + ")");
    }

    static const std::set<std::string> sections = {"system", "cell", "mcs", "configuration", "run"};
    for (const auto &[name, child] : root)
    {
        if (!sections.count(name))
            throw ScenarioError(name, "unknown section");
        if (child.empty() && !child.data().empty())
            throw ScenarioError(name, "key outside of a section");
    }

    Scenario sc;
    {
        detail::SectionReader r(root, "system");
        detail::visit_system(sc.system, [&](const char *k, auto &f) { r.read(k, f); });
        r.reject_unknown();
    }
    {
        detail::SectionReader r(root, "cell");
        detail::visit_cell(sc.cell, [&](const char *k, auto &f) { r.read(k, f); });
        r.reject_unknown();
    }
    {
        detail::SectionReader r(root, "mcs");
        r.read("approx_a", sc.approx.a);
        r.read("approx_b", sc.approx.b);
        r.read("table_file", sc.mcs_table_file);
        r.reject_unknown();
        if (!sc.mcs_table_file.empty())
        {
            std::filesystem::path p(sc.mcs_table_file);
            if (p.is_relative())
                p = base_dir / p;
            try
            {
                sc.table = McsTable::load(p);
            }
            catch (const std::exception &e)
            {
                throw ScenarioError("mcs.table_file", e.what());
            }
        }
        sc.approx.se_max = sc.table.se_max();
    }
    {
        detail::SectionReader r(root, "configuration");
        if (r.present())
        {
            Configuration cfg;
            cfg.streams = sc.system.home_antennas;
            detail::visit_configuration(cfg, [&](const char *k, auto &f) { r.read(k, f); });
            r.reject_unknown();
            sc.configuration = cfg;
        }
    }
    {
        detail::SectionReader r(root, "run");
        r.read("seed", sc.seed);
        r.reject_unknown();
    }

    try
    {
        sc.approx.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ScenarioError("mcs", e.what());
    }
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("<file>", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.parent_path());
}

inline std::string serialize_scenario(const Scenario &sc)
{
    std::ostringstream out;
    auto put = [&](const char *k, const auto &v) {
        using T = std::decay_t<decltype(v)>;
        out << k << " = ";
        if constexpr (std::is_same_v<T, double>)
            out << detail::format_double(v);
        else if constexpr (std::is_same_v<T, bool>)
            out << (v ? "true" : "false");
        else
            out << v;
        out << '\n';
    };
    Scenario copy = sc;
    out << "[system]\n";
    detail::visit_system(copy.system, put);
    out << "\n[cell]\n";
    detail::visit_cell(copy.cell, put);
    out << "\n[mcs]\n";
    put("approx_a", copy.approx.a);
    put("approx_b", copy.approx.b);
    if (!copy.mcs_table_file.empty())
        put("table_file", copy.mcs_table_file);
    if (copy.configuration)
    {
        out << "\n[configuration]\n";
        detail::visit_configuration(*copy.configuration, put);
    }
    out << "\n[run]\n";
    put("seed", copy.seed);
    return out.str();
}

inline void save_scenario(const Scenario &sc, const std::filesystem::path &path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << serialize_scenario(sc);
}

} // namespace fwa

#endif
