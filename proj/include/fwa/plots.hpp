// SPDX-License-Identifier: Apache-2.0
//
// Emits self-contained matplotlib scripts for result CSVs. Scripts locate
// their CSV files relative to their own directory.

#ifndef FWA_PLOTS_HPP
#define FWA_PLOTS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwa::plots {

namespace fs = std::filesystem;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

inline std::vector<std::string> read_header(const fs::path &csv)
{
    std::ifstream in(csv);
    if (!in)
        throw std::runtime_error("plots: cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    return split_csv_line(line);
}

inline void require_columns(const fs::path &csv, const std::vector<std::string> &cols)
{
    const auto header = read_header(csv);
    for (const auto &c : cols)
        if (std::find(header.begin(), header.end(), c) == header.end())
            throw std::runtime_error("plots: " + csv.filename().string() + " lacks column '" + c + "'");
}

inline std::string py_list(const std::vector<std::string> &items)
{
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i)
        s += (i ? ", " : "") + std::string("\"") + items[i] + "\"";
    return s + "]";
}

inline constexpr const char *prelude = R"(#!/usr/bin/env python3
import csv
import os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        return list(csv.DictReader(f))

)";

inline fs::path write_script(const fs::path &path, const std::string &body)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("plots: cannot write " + path.string());
    out << prelude << body;
    return path;
}

} // namespace detail

/// DL and UL user limits against T_u for one plan CSV.
inline fs::path limits_script(const fs::path &plan_csv, const fs::path &script)
{
    detail::require_columns(plan_csv, {"ul_slots", "dl_limit_homes", "ul_limit_homes"});
    std::string body = "rows = load(\"" + plan_csv.filename().string() + "\")\n";
    body += R"PY(tu = [int(r["ul_slots"]) for r in rows]
dl = [int(r["dl_limit_homes"]) for r in rows]
ul = [int(r["ul_limit_homes"]) for r in rows]
fig, ax = plt.subplots()
ax.plot(tu, dl, "o-", label="DL limit")
ax.plot(tu, ul, "s-", label="UL limit")
ax.set_xlabel("UL slots T_u")
ax.set_ylabel("homes")
ax.set_xticks(tu)
ax.grid(True, alpha=0.3)
ax.legend()
)PY";
    body += "fig.savefig(os.path.join(HERE, \"" + script.stem().string() + ".png\"), dpi=150)\n";
    return detail::write_script(script, body);
}

/// User limit and best group sizes against radius; one series per CSV
/// (one CSV per setting file).
inline fs::path radius_script(const std::vector<fs::path> &radius_csvs, const fs::path &script)
{
    std::vector<std::string> names;
    for (const auto &p : radius_csvs)
    {
        detail::require_columns(p, {"radius_m", "user_limit_homes", "dl_group_size", "ul_group_size"});
        names.push_back(p.filename().string());
    }
    std::string body = "files = " + detail::py_list(names) + "\n";
    body += R"PY(fig, axes = plt.subplots(1, 3, figsize=(15, 4))
for name in files:
    rows = load(name)
    label = os.path.splitext(name)[0]
    r = [float(x["radius_m"]) for x in rows]
    axes[0].plot(r, [int(x["user_limit_homes"]) for x in rows], "o-", label=label)
    axes[1].plot(r, [int(x["dl_group_size"]) for x in rows], "o-", label=label)
    axes[2].plot(r, [int(x["ul_group_size"]) for x in rows], "o-", label=label)
for ax, title in zip(axes, ["user limit", "DL group size", "UL group size"]):
    ax.set_xscale("log")
    ax.set_xlabel("radius (m)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
axes[0].legend()
fig.tight_layout()
)PY";
    body += "fig.savefig(os.path.join(HERE, \"" + script.stem().string() + ".png\"), dpi=150)\n";
    return detail::write_script(script, body);
}

/// Best SR_d, SR_u and WSR per T_u for one operate frontier CSV.
inline fs::path frontier_script(const fs::path &frontier_csv, const fs::path &script)
{
    detail::require_columns(frontier_csv,
                            {"ul_slots", "dl_group_size", "ul_group_size", "sr_dl_mbps", "sr_ul_mbps", "wsr_mbps"});
    std::string body = "rows = load(\"" + frontier_csv.filename().string() + "\")\n";
    body += R"PY(fig, ax = plt.subplots()
if not rows:
    ax.text(0.5, 0.5, "no feasible configuration", ha="center", va="center", transform=ax.transAxes)
else:
    tu = [int(r["ul_slots"]) for r in rows]
    ax.plot(tu, [float(r["sr_dl_mbps"]) for r in rows], "o-", label="SR_d")
    ax.plot(tu, [float(r["sr_ul_mbps"]) for r in rows], "s-", label="SR_u")
    ax.plot(tu, [float(r["wsr_mbps"]) for r in rows], "^-", label="WSR")
    for r in rows:
        ax.annotate("(%s,%s)" % (r["dl_group_size"], r["ul_group_size"]),
                    (int(r["ul_slots"]), float(r["wsr_mbps"])), fontsize=7)
    ax.legend()
ax.set_xlabel("UL slots T_u")
ax.set_ylabel("Mbps")
ax.grid(True, alpha=0.3)
)PY";
    body += "fig.savefig(os.path.join(HERE, \"" + script.stem().string() + ".png\"), dpi=150)\n";
    return detail::write_script(script, body);
}

/// Scripts for every recognized CSV in `dir`.
inline std::vector<fs::path> emit_plots(const fs::path &dir)
{
    std::vector<fs::path> plan, frontier, radius;
    for (const auto &e : fs::directory_iterator(dir))
    {
        if (e.path().extension() != ".csv")
            continue;
        const auto stem = e.path().stem().string();
        if (stem.rfind("plan_", 0) == 0)
            plan.push_back(e.path());
        else if (stem.rfind("frontier_", 0) == 0)
            frontier.push_back(e.path());
        else if (stem.rfind("user_limit_vs_radius", 0) == 0)
            radius.push_back(e.path());
    }
    std::sort(plan.begin(), plan.end());
    std::sort(frontier.begin(), frontier.end());
    std::sort(radius.begin(), radius.end());
    std::vector<fs::path> out;
    for (const auto &p : plan)
        out.push_back(limits_script(p, dir / ("plot_" + p.stem().string() + ".py")));
    for (const auto &p : frontier)
        out.push_back(frontier_script(p, dir / ("plot_" + p.stem().string() + ".py")));
    if (!radius.empty())
        out.push_back(radius_script(radius, dir / "plot_user_limit_vs_radius.py"));
    return out;
}

} // namespace fwa::plots

#endif
