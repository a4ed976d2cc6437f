// SPDX-License-Identifier: Apache-2.0

#include "fwa/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

using namespace fwa;
using Catch::Approx;

namespace {

std::string with_line(const std::string &section, const std::string &line)
{
    return "[" + section + "]\n" + line + "\n";
}

} // namespace

TEST_CASE("baseline scenario file loads the reference setting", "[scenario]")
{
    const auto sc = load_scenario(std::filesystem::path(FWA_DATA_DIR) / "baseline.scenario");
    CHECK(sc.system.subchannel_count == 65);
    CHECK(sc.system.bs_power_w == 40.0);
    CHECK(sc.system.bs_antennas == 64);
    CHECK(sc.system.home_antennas == 4);
    CHECK(sc.cell.realization_count == 100);
    CHECK(sc.table == McsTable::standard());
    CHECK(sc == Scenario{});
}

TEST_CASE("invalid values are rejected", "[scenario]")
{
    CHECK_THROWS_AS(parse_scenario(with_line("system", "home_antennas = 3")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("system", "subchannel_count = 0")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("system", "bs_power_w = -1")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("system", "home_antennas = 16\nbs_antennas = 4")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("configuration", "ul_slots = 20")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("configuration", "ul_slots = 0")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("cell", "feasibility_quantile = 1.5")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("cell", "radius_m = 20")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("mcs", "approx_b = 2")), ScenarioError);
}

TEST_CASE("unknown keys, sections and malformed numbers are errors", "[scenario]")
{
    CHECK_THROWS_AS(parse_scenario(with_line("system", "bandwidth_mhz = 25")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("sytem", "bandwidth_hz = 25e6")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("system", "bandwidth_hz = wide")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with_line("system", "subchannel_count = 6.5")), ScenarioError);
    try
    {
        parse_scenario(with_line("system", "home_antennas = 3"));
        FAIL("expected an error");
    }
    catch (const ScenarioError &e)
    {
        CHECK(std::string(e.field()).find("home_antennas") != std::string::npos);
    }
}

TEST_CASE("non-square UPA sizes of the form 2q^2 are accepted", "[scenario]")
{
    CHECK_NOTHROW(parse_scenario(with_line("system", "bs_antennas = 128")));
    CHECK_NOTHROW(parse_scenario(with_line("system", "home_antennas = 8")));
    CHECK_THROWS_AS(parse_scenario(with_line("system", "bs_antennas = 96")), ScenarioError);
}

TEST_CASE("missing keys keep defaults, configuration streams default to M_H", "[scenario]")
{
    const auto sc = parse_scenario("[cell]\nradius_m = 5000\n[configuration]\nul_slots = 4\ndl_group_size = 6\n");
    CHECK(sc.cell.radius_m == 5000.0);
    CHECK(sc.system.subchannel_count == 65);
    REQUIRE(sc.configuration);
    CHECK(sc.configuration->ul_slots == 4);
    CHECK(sc.configuration->dl_group_size == 6);
    CHECK(sc.configuration->ul_group_size == 1);
    CHECK(sc.configuration->streams == 4);
    CHECK(parse_scenario("").configuration == std::nullopt);
}

TEST_CASE("serialize then parse is the identity", "[scenario][property]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i)
    {
        Scenario sc;
        sc.system.bandwidth_hz = 1e6 + u(rng) * 1e8;
        sc.system.subchannel_count = 1 + static_cast<int>(u(rng) * 200);
        sc.system.bs_power_w = 0.1 + u(rng) * 100;
        sc.system.mbr_dl_bps = u(rng) * 1e8 + 1.0;
        sc.system.noise_figure_db = u(rng) * 12;
        sc.cell.radius_m = 100 + u(rng) * 1e5;
        sc.cell.bs_correlation = u(rng);
        sc.cell.shadowing = u(rng) < 0.5;
        sc.cell.feasibility_quantile = 0.5 + 0.5 * u(rng);
        sc.approx.a = 0.1 + u(rng);
        sc.approx.b = 0.05 + 0.9 * u(rng);
        sc.seed = rng();
        if (u(rng) < 0.5)
            sc.configuration = Configuration{1 + static_cast<int>(u(rng) * 19), 1 + static_cast<int>(u(rng) * 16),
                                             1 + static_cast<int>(u(rng) * 16), 1 + static_cast<int>(u(rng) * 4)};
        const auto back = parse_scenario(serialize_scenario(sc));
        REQUIRE(back == sc);
        CHECK(serialize_scenario(back) == serialize_scenario(sc));
    }
}

TEST_CASE("save and load through the file system", "[scenario]")
{
    const auto dir = std::filesystem::temp_directory_path() / "fwa_scenario_test";
    std::filesystem::create_directories(dir);
    Scenario sc;
    sc.cell.radius_m = 4000;
    sc.seed = 99;
    save_scenario(sc, dir / "x.scenario");
    CHECK(load_scenario(dir / "x.scenario") == sc);
    CHECK_THROWS_AS(load_scenario(dir / "missing.scenario"), ScenarioError);
}

TEST_CASE("custom MCS table file is resolved relative to the scenario", "[scenario]")
{
    const auto dir = std::filesystem::temp_directory_path() / "fwa_scenario_table";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "t.csv") << "sinr_db,se_bps_hz\n0,1\n10,2\n";
    std::ofstream(dir / "s.scenario") << "[mcs]\ntable_file = t.csv\n";
    const auto sc = load_scenario(dir / "s.scenario");
    CHECK(sc.table.size() == 2);
    CHECK(sc.table.se_max() == 2.0);
    std::ofstream(dir / "bad.scenario") << "[mcs]\ntable_file = nope.csv\n";
    CHECK_THROWS_AS(load_scenario(dir / "bad.scenario"), ScenarioError);
}

TEST_CASE("noise power", "[scenario]")
{
    SystemSetting s;
    const double w = noise_power(s);
    CHECK(10.0 * std::log10(w * 1e3) == Approx(-109.44).margin(0.01));
    CHECK(w == Approx(1.139e-14).epsilon(1e-3));
    s.noise_figure_db = 0;
    s.subchannel_bandwidth_hz = 1;
    CHECK(noise_power(s) == Approx(3.981e-21).epsilon(1e-3));

    SystemSetting a, b;
    b.noise_density_dbm_hz += 0.5;
    CHECK(noise_power(b) > noise_power(a));
    b = a;
    b.noise_figure_db += 0.5;
    CHECK(noise_power(b) > noise_power(a));
    b = a;
    b.subchannel_bandwidth_hz *= 1.01;
    CHECK(noise_power(b) > noise_power(a));
}

TEST_CASE("per-PRB downlink power", "[scenario]")
{
    SystemSetting s;
    CHECK(prb_power_dl(s) == Approx(0.6154).epsilon(1e-4));
    s.bs_power_w = 80;
    s.subchannel_count = 133;
    CHECK(prb_power_dl(s) == Approx(0.6015).epsilon(1e-4));
    s.subchannel_count = 1;
    CHECK(prb_power_dl(s) == 80.0);
}

TEST_CASE("BD user cap", "[scenario]")
{
    SystemSetting s;
    CHECK(bd_user_cap(s) == 16);
    s.home_antennas = 8;
    CHECK(bd_user_cap(s) == 8);
    s.home_antennas = 64;
    CHECK(bd_user_cap(s) == 1);
    for (int mbs : {4, 16, 36, 64, 128})
        for (int mh : {1, 4, 8})
        {
            SystemSetting x, y;
            x.bs_antennas = mbs;
            x.home_antennas = mh;
            y = x;
            y.bs_antennas = mbs * 2;
            CHECK(bd_user_cap(y) >= bd_user_cap(x));
            y = x;
            y.home_antennas = mh * 2;
            CHECK(bd_user_cap(y) <= bd_user_cap(x));
        }
}
