// SPDX-License-Identifier: Apache-2.0
//
// fwaplan command line: plan, validate, operate, channel-dump, selftest, plots.

#ifndef FWA_CLI_HPP
#define FWA_CLI_HPP

#include "fwa/plots.hpp"
#include "fwa/study.hpp"
#include "fwa/verify/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef FWA_VERSION
#define FWA_VERSION "0.1.0"
#endif

namespace fwa::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

inline std::string read_file(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string num(double v) { return fwa::detail::format_double(v); }

/// Collects artifacts of one command; the manifest lists each with its hash.
class RunManifest
{
  public:
    RunManifest(std::string command, fs::path out_dir) : command_(std::move(command)), dir_(std::move(out_dir))
    {
        fs::create_directories(dir_);
    }

    void set_scenario(const std::string &path, const std::string &content, std::uint64_t seed)
    {
        scenario_path_ = path;
        scenario_hash_ = sha256_hex(content);
        seed_ = seed;
    }

    fs::path write(const std::string &name, const std::string &content)
    {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + p.string());
        out << content;
        add(p);
        return p;
    }

    void add(const fs::path &p)
    {
        for (const auto &o : outputs_)
            if (o == p)
                return;
        outputs_.push_back(p);
    }

    const fs::path &dir() const { return dir_; }

    fs::path finish()
    {
        Json j;
        j["command"] = command_;
        j["scenario"] = {{"path", scenario_path_}, {"sha256", scenario_hash_}};
        j["seed"] = seed_;
        j["tool_version"] = FWA_VERSION;
        j["started_utc"] = started_;
        j["finished_utc"] = utc_timestamp();
        Json outs = Json::array();
        for (const auto &p : outputs_)
            outs.push_back({{"path", p.filename().string()}, {"sha256", sha256_hex(read_file(p))}});
        j["outputs"] = outs;
        const fs::path m = dir_ / ("manifest_" + command_ + ".json");
        std::ofstream(m) << j.dump(2) << "\n";
        return m;
    }

  private:
    std::string command_;
    fs::path dir_;
    std::string scenario_path_ = "builtin";
    std::string scenario_hash_;
    std::uint64_t seed_ = 0;
    std::string started_ = utc_timestamp();
    std::vector<fs::path> outputs_;
};

struct CommonOptions
{
    std::string scenario;
    std::vector<double> radii;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::optional<double> quantile;
    int streams = 0;
    int jobs = 0;
    std::string out_dir = ".";
};

inline void add_common(CLI::App &app, CommonOptions &o)
{
    app.add_option("--scenario", o.scenario, "scenario INI file (built-in baseline if omitted)");
    app.add_option("--radius", o.radii, "cell radius in m; several values sweep")->delimiter(',');
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--realizations", o.realizations, "Monte-Carlo realizations per evaluation")->check(CLI::PositiveNumber);
    app.add_option("--quantile", o.quantile, "feasibility quantile in (0, 1]");
    app.add_option("--streams", o.streams, "streams per home (0: M_H)")->check(CLI::NonNegativeNumber);
    app.add_option("--jobs", o.jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--out-dir", o.out_dir, "output directory");
}

struct LoadedScenario
{
    Scenario base;
    std::string path = "builtin";
    std::string content;
};

inline LoadedScenario load_base(const CommonOptions &o)
{
    LoadedScenario out;
    if (!o.scenario.empty())
    {
        out.path = o.scenario;
        out.content = read_file(o.scenario);
        out.base = parse_scenario(out.content, fs::path(o.scenario).parent_path());
    }
    else
        out.content = serialize_scenario(out.base);
    if (o.seed)
        out.base.seed = *o.seed;
    if (o.realizations)
        out.base.cell.realization_count = *o.realizations;
    if (o.quantile)
        out.base.cell.feasibility_quantile = *o.quantile;
    out.base.validate();
    return out;
}

inline std::vector<double> radii_or_default(const CommonOptions &o, const Scenario &sc)
{
    return o.radii.empty() ? std::vector<double>{sc.cell.radius_m} : o.radii;
}

inline Scenario at_radius(Scenario sc, double r)
{
    sc.cell.radius_m = r;
    sc.validate();
    return sc;
}

inline int streams_of(const CommonOptions &o, const Scenario &sc)
{
    return o.streams > 0 ? o.streams : sc.system.home_antennas;
}

inline std::string radius_tag(double r) { return "R" + num(r); }

inline Json config_json(const Configuration &v)
{
    return {{"ul_slots", v.ul_slots}, {"dl_group_size", v.dl_group_size}, {"ul_group_size", v.ul_group_size},
            {"streams", v.streams}};
}

inline std::string plan_csv(const PlanResult &r)
{
    std::ostringstream os;
    os << "ul_slots,dl_limit_homes,ul_limit_homes,dl_group_size,ul_group_size\n";
    for (std::size_t t = 0; t < r.dl_limit.size(); ++t)
        os << t + 1 << ',' << r.dl_limit[t] << ',' << r.ul_limit[t] << ',' << r.dl_group[t] << ',' << r.ul_group[t]
           << '\n';
    return os.str();
}

inline std::string requirements_csv(const PlanResult &r)
{
    std::ostringstream os;
    os << "direction,ul_slots,direction_slots,group_size_homes,streams,status,n_subchannels,cutoff_subchannels,"
          "user_limit_homes\n";
    for (const auto &e : r.requirements.entries)
    {
        os << to_string(e.direction) << ',' << e.ul_slots << ',' << e.slots << ',' << e.group_size << ',' << e.streams
           << ',' << to_string(e.status) << ',';
        if (e.n == n_infeasible)
            os << "inf";
        else
            os << e.n;
        os << ',' << e.cutoff << ',' << e.user_limit << '\n';
    }
    return os.str();
}

inline Json plan_json(const PlanResult &r)
{
    Json j;
    j["radius_m"] = r.radius_m;
    j["seed"] = r.seed;
    j["realizations"] = r.realizations;
    j["quantile"] = r.quantile;
    j["streams"] = r.streams;
    j["supportable"] = r.supportable;
    j["user_limit"] = r.user_limit;
    if (r.supportable)
        j["best"] = config_json(r.best);
    Json opt = Json::array();
    for (const auto &v : r.optima)
        opt.push_back(config_json(v));
    j["optima"] = opt;
    return j;
}

inline int cmd_plan(const CommonOptions &o, bool prune, std::ostream &out)
{
    const auto ls = load_base(o);
    RunManifest man("plan", o.out_dir);
    man.set_scenario(ls.path, ls.content, ls.base.seed);
    std::ostringstream sweep;
    sweep << "radius_m,user_limit_homes,ul_slots,dl_group_size,ul_group_size\n";
    for (double r : radii_or_default(o, ls.base))
    {
        const auto sc = at_radius(ls.base, r);
        const auto res = optimal_configuration(sc, {streams_of(o, sc), o.jobs, prune});
        const auto tag = radius_tag(r);
        man.write("plan_" + tag + ".csv", plan_csv(res));
        man.write("requirements_" + tag + ".csv", requirements_csv(res));
        man.write("plan_" + tag + ".json", plan_json(res).dump(2) + "\n");
        sweep << num(r) << ',' << res.user_limit << ',' << res.best.ul_slots << ','
              << (res.supportable ? res.best.dl_group_size : 0) << ',' << (res.supportable ? res.best.ul_group_size : 0)
              << '\n';
        out << "R=" << num(r) << " m: U*=" << res.user_limit;
        if (res.supportable)
            out << " (T_u,S_d,S_u)=(" << res.best.ul_slots << ',' << res.best.dl_group_size << ','
                << res.best.ul_group_size << ")";
        out << '\n';
    }
    man.write("user_limit_vs_radius.csv", sweep.str());
    for (const auto &p : plots::emit_plots(man.dir()))
        man.add(p);
    out << "manifest: " << man.finish().string() << '\n';
    return 0;
}

inline int cmd_validate(const CommonOptions &o, int start_u, int max_steps, std::ostream &out)
{
    const auto ls = load_base(o);
    RunManifest man("validate", o.out_dir);
    man.set_scenario(ls.path, ls.content, ls.base.seed);
    for (double r : radii_or_default(o, ls.base))
    {
        const auto sc = at_radius(ls.base, r);
        const int L = streams_of(o, sc);
        int start = start_u;
        if (start < 1)
        {
            start = optimal_configuration(sc, {L, o.jobs, true}).user_limit;
            if (start < 1)
            {
                out << "R=" << num(r) << " m: planner finds no supportable configuration; nothing to validate\n";
                continue;
            }
        }
        const ChannelModel model(sc.system, sc.cell);
        const auto rep = brute_force_limit(model, sc, start, L, o.jobs, max_steps);
        std::ostringstream csv;
        csv << "homes,best_feasible_fraction,qualifying_ul_slots,qualifying_dl_group_size,qualifying_ul_group_size\n";
        Json steps = Json::array();
        for (const auto &s : rep.steps)
        {
            csv << s.homes << ',' << num(s.best_fraction);
            Json js{{"homes", s.homes}, {"best_fraction", s.best_fraction}};
            if (s.qualifying)
            {
                csv << ',' << s.qualifying->ul_slots << ',' << s.qualifying->dl_group_size << ','
                    << s.qualifying->ul_group_size;
                js["qualifying"] = config_json(*s.qualifying);
            }
            else
                csv << ",0,0,0";
            csv << '\n';
            steps.push_back(js);
        }
        Json j{{"radius_m", r},
               {"planner_limit", rep.planner_limit},
               {"brute_force_limit", rep.brute_force_limit},
               {"start_failed", rep.start_failed},
               {"budget_exhausted", rep.budget_exhausted},
               {"realizations", rep.realizations},
               {"seed", rep.seed},
               {"steps", steps}};
        const auto tag = radius_tag(r);
        man.write("validation_" + tag + ".csv", csv.str());
        man.write("validation_" + tag + ".json", j.dump(2) + "\n");
        out << "R=" << num(r) << " m: start U=" << start << " brute-force U=" << rep.brute_force_limit;
        if (rep.start_failed)
            out << " (start value not feasible)";
        if (rep.budget_exhausted)
            out << " (step budget exhausted)";
        out << '\n';
    }
    out << "manifest: " << man.finish().string() << '\n';
    return 0;
}

inline std::optional<Configuration> parse_config(const std::string &s, int streams)
{
    if (s.empty())
        return std::nullopt;
    Configuration v;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    if (!(is >> v.ul_slots >> c1 >> v.dl_group_size >> c2 >> v.ul_group_size) || c1 != ',' || c2 != ',')
        throw std::invalid_argument("--planning-config expects T_u,S_d,S_u");
    v.streams = streams;
    return v;
}

inline Json point_json(const OperatingPoint &p)
{
    return {{"config", config_json(p.config)}, {"sr_dl_mbps", p.sr_dl / 1e6}, {"sr_ul_mbps", p.sr_ul / 1e6},
            {"wsr_mbps", p.wsr / 1e6},         {"fraction", p.fraction},     {"feasible", p.feasible}};
}

inline int cmd_operate(const CommonOptions &o, int homes, double alpha, const std::string &planning_config,
                       bool skip_planning, std::ostream &out)
{
    if (homes < 1)
        throw std::invalid_argument("operate: --active-homes must be >= 1");
    const auto ls = load_base(o);
    RunManifest man("operate", o.out_dir);
    man.set_scenario(ls.path, ls.content, ls.base.seed);
    for (double r : radii_or_default(o, ls.base))
    {
        const auto sc = at_radius(ls.base, r);
        const int L = streams_of(o, sc);
        auto planning = parse_config(planning_config, L);
        if (!planning && sc.configuration)
            planning = sc.configuration;
        if (!planning && !skip_planning)
        {
            const auto plan = optimal_configuration(sc, {L, o.jobs, true});
            if (plan.supportable)
                planning = plan.best;
        }
        const ChannelModel model(sc.system, sc.cell);
        const auto rep = best_operating_config(model, sc, homes, alpha, L, o.jobs, planning);
        std::ostringstream csv;
        csv << "ul_slots,dl_group_size,ul_group_size,sr_dl_mbps,sr_ul_mbps,wsr_mbps,feasible_fraction\n";
        Json frontier = Json::array();
        for (const auto &p : rep.frontier)
        {
            csv << p.config.ul_slots << ',' << p.config.dl_group_size << ',' << p.config.ul_group_size << ','
                << num(p.sr_dl / 1e6) << ',' << num(p.sr_ul / 1e6) << ',' << num(p.wsr / 1e6) << ','
                << num(p.fraction) << '\n';
            frontier.push_back(point_json(p));
        }
        Json j{{"radius_m", r}, {"homes", homes}, {"alpha", alpha}, {"frontier", frontier}};
        j["best"] = rep.best ? point_json(*rep.best) : Json(nullptr);
        j["planning"] = rep.planning ? point_json(*rep.planning) : Json(nullptr);
        const auto tag = radius_tag(r) + "_U" + std::to_string(homes);
        man.write("frontier_" + tag + ".csv", csv.str());
        man.write("operate_" + tag + ".json", j.dump(2) + "\n");
        out << "R=" << num(r) << " m, U=" << homes << ": ";
        if (rep.best)
            out << "best WSR " << num(rep.best->wsr / 1e6) << " Mbps at (T_u,S_d,S_u)=(" << rep.best->config.ul_slots
                << ',' << rep.best->config.dl_group_size << ',' << rep.best->config.ul_group_size << ")";
        else
            out << "no feasible configuration";
        if (rep.planning)
            out << "; planning config WSR " << num(rep.planning->wsr / 1e6) << " Mbps"
                << (rep.planning->feasible ? "" : " (not U-feasible)");
        out << '\n';
    }
    for (const auto &p : plots::emit_plots(man.dir()))
        man.add(p);
    out << "manifest: " << man.finish().string() << '\n';
    return 0;
}

inline int cmd_channel_dump(const CommonOptions &o, int homes, std::ostream &out)
{
    if (homes < 1)
        throw std::invalid_argument("channel-dump: --active-homes must be >= 1");
    const auto ls = load_base(o);
    RunManifest man("channel-dump", o.out_dir);
    man.set_scenario(ls.path, ls.content, ls.base.seed);
    for (double r : radii_or_default(o, ls.base))
    {
        const auto sc = at_radius(ls.base, r);
        const ChannelModel model(sc.system, sc.cell);
        Rng rng = make_rng(sc.seed, {stream::dump, static_cast<std::uint64_t>(homes)});
        const auto hs = model.sample_homes(homes, rng);
        std::ostringstream h, m;
        h << "home,x_m,y_m,distance_2d_m,distance_3d_m,path_loss_db,shadowing_db,rician_factor_linear,"
             "large_scale_gain\n";
        m << "home,subchannel,home_antenna,bs_antenna,re_sqrt_gain,im_sqrt_gain\n";
        for (std::size_t k = 0; k < hs.size(); ++k)
        {
            const auto &p = hs[k].placement;
            h << k << ',' << num(p.x_m) << ',' << num(p.y_m) << ',' << num(p.distance_2d_m) << ','
              << num(p.distance_3d_m) << ',' << num(p.path_loss_db) << ',' << num(p.shadowing_db) << ','
              << num(p.rician_factor_linear) << ',' << num(p.large_scale_gain) << '\n';
            for (int c = 0; c < sc.system.subchannel_count; ++c)
            {
                const CMatrix g = model.channel(hs[k], c);
                for (Eigen::Index i = 0; i < g.rows(); ++i)
                    for (Eigen::Index j = 0; j < g.cols(); ++j)
                        m << k << ',' << c << ',' << i << ',' << j << ',' << num(g(i, j).real()) << ','
                          << num(g(i, j).imag()) << '\n';
            }
        }
        const auto tag = radius_tag(r);
        man.write("channel_homes_" + tag + ".csv", h.str());
        man.write("channel_matrices_" + tag + ".csv", m.str());
        out << "R=" << num(r) << " m: dumped " << homes << " homes\n";
    }
    out << "manifest: " << man.finish().string() << '\n';
    return 0;
}

inline Json suite_json(const verify::SuiteStats &s)
{
    return {{"suite", s.name},    {"cases", s.cases},     {"failures", s.failures},
            {"worst", s.worst},   {"seconds", s.seconds}, {"passed", s.passed()}};
}

inline int cmd_selftest(const CommonOptions &o, int pd_cases, int bd_cases, std::ostream &out)
{
    const std::uint64_t seed = o.seed.value_or(1);
    RunManifest man("selftest", o.out_dir);
    man.set_scenario("builtin", serialize_scenario(Scenario{}), seed);
    std::vector<verify::SuiteStats> suites;
    suites.push_back(verify::pd_oracle_suite(pd_cases, seed));
    auto bd = verify::bd_suite(bd_cases, seed);
    suites.push_back(bd.residual);
    suites.push_back(bd.su_mimo);
    suites.push_back(bd.routes);

    verify::SuiteStats closed{"closed-forms"};
    const auto check = [&](bool ok, const std::string &what) {
        ++closed.cases;
        if (!ok)
        {
            ++closed.failures;
            closed.notes.push_back(what);
        }
    };
    check(c_min(30e6, 360e3, 4, 5.18) == 5, "c_min(30 Mbps, L=4)");
    check(c_min(5e6, 360e3, 4, 5.18) == 1, "c_min(5 Mbps, L=4)");
    check(c_min(30e6, 360e3, 1, 5.18) == 17, "c_min(30 Mbps, L=1)");
    check(direction_user_limit(10, 65, 6) == 36, "direction_user_limit(10, 65, 6)");
    check(direction_user_limit(20, 65, 8) == 24, "direction_user_limit(20, 65, 8)");
    suites.push_back(closed);

    int failed = 0;
    Json arr = Json::array();
    for (const auto &s : suites)
    {
        out << (s.passed() ? "PASS " : "FAIL ") << s.name << ": " << s.cases << " cases, " << s.failures
            << " failures, worst " << num(s.worst) << ", " << std::fixed << std::setprecision(1) << s.seconds
            << " s\n";
        out.unsetf(std::ios::floatfield);
        for (const auto &n : s.notes)
            out << "  " << n << '\n';
        failed += s.passed() ? 0 : 1;
        arr.push_back(suite_json(s));
    }
    man.write("selftest.json", Json{{"seed", seed}, {"suites", arr}}.dump(2) + "\n");
    out << suites.size() - failed << " passed, " << failed << " failed\n";
    man.finish();
    return failed == 0 ? 0 : 1;
}

inline int cmd_plots(const CommonOptions &o, std::ostream &out)
{
    for (const auto &p : plots::emit_plots(o.out_dir))
        out << p.string() << '\n';
    return 0;
}

inline int run(int argc, char **argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"Planning and operation of TDD MU-MIMO fixed wireless access cells"};
    app.set_version_flag("--version", FWA_VERSION);
    app.require_subcommand(1);

    CommonOptions o;
    bool no_prune = false;
    int start_u = 0, max_steps = 200, homes = 0, pd_cases = 200, bd_cases = 1000;
    double alpha = 0.5;
    std::string planning_config;
    bool skip_planning = false;

    auto *plan = app.add_subcommand("plan", "optimal configuration and user limit per radius");
    add_common(*plan, o);
    plan->add_flag("--no-prune", no_prune, "search every (S, n) even when it cannot beat smaller groups");

    auto *val = app.add_subcommand("validate", "brute-force check of the user limit");
    add_common(*val, o);
    val->add_option("--start-u", start_u, "first home count tried (0: planner limit)");
    val->add_option("--max-steps", max_steps, "largest number of home counts tried")->check(CLI::PositiveNumber);

    auto *op = app.add_subcommand("operate", "weighted sum-rate of configurations for a given home count");
    add_common(*op, o);
    op->add_option("--active-homes", homes, "number of homes U")->required();
    op->add_option("--alpha", alpha, "DL weight of the weighted sum-rate")->check(CLI::Range(0.0, 1.0));
    op->add_option("--planning-config", planning_config, "planning configuration T_u,S_d,S_u to compare against");
    op->add_flag("--skip-planning", skip_planning, "do not run the planner for the comparison configuration");

    auto *dump = app.add_subcommand("channel-dump", "write sampled homes and channel matrices");
    add_common(*dump, o);
    dump->add_option("--active-homes", homes, "number of homes")->default_val(4);

    auto *self = app.add_subcommand("selftest", "oracle suites: PD vs grid search, BD identities");
    add_common(*self, o);
    self->add_option("--pd-cases", pd_cases, "tiny PD instances")->check(CLI::PositiveNumber);
    self->add_option("--bd-cases", bd_cases, "random BD groups")->check(CLI::PositiveNumber);

    auto *plt = app.add_subcommand("plots", "emit plotting scripts for the CSV files in --out-dir");
    add_common(*plt, o);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e, out, err);
    }

    try
    {
        if (*plan)
            return cmd_plan(o, !no_prune, out);
        if (*val)
            return cmd_validate(o, start_u, max_steps, out);
        if (*op)
            return cmd_operate(o, homes, alpha, planning_config, skip_planning, out);
        if (*dump)
            return cmd_channel_dump(o, homes, out);
        if (*self)
            return cmd_selftest(o, pd_cases, bd_cases, out);
        if (*plt)
            return cmd_plots(o, out);
    }
    catch (const ScenarioError &e)
    {
        err << "scenario error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace fwa::cli

#endif
