// SPDX-License-Identifier: Apache-2.0

#include "fwa/mcs.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

using namespace fwa;
using Catch::Approx;

namespace {
double lin(double db) { return std::pow(10.0, db / 10.0); }
} // namespace

TEST_CASE("practical table lookups", "[mcs]")
{
    const auto t = McsTable::standard();
    CHECK(t.size() == 15);
    CHECK(se_practical(lin(3.0), t) == 1.10);
    CHECK(se_practical(lin(-10.0), t) == 0.0);
    CHECK(se_practical(lin(30.0), t) == 5.18);
    CHECK(se_practical(0.0, t) == 0.0);
    CHECK(t.se_max() == 5.18);
    CHECK(t.first_threshold_linear() == Approx(lin(-6.5)));
}

TEST_CASE("threshold is an inclusive lower bound", "[mcs][property]")
{
    const auto t = McsTable::standard();
    for (const auto &l : t.levels())
    {
        const double g = lin(l.sinr_db);
        CHECK(t.se(g) == l.se_bps_hz);
        CHECK(t.se(g * (1 - 1e-9)) < l.se_bps_hz);
    }
}

TEST_CASE("practical and approximate rates are monotone", "[mcs][property]")
{
    const auto t = McsTable::standard();
    const McsApprox ap;
    double prev_se = 0.0, prev_r = 0.0;
    for (double db = -20.0; db <= 40.0; db += 0.01)
    {
        const double se = t.se(lin(db));
        const double r = rate_approx(lin(db), 1.0, ap, 360e3);
        CHECK(se >= prev_se);
        CHECK(r >= prev_r);
        prev_se = se;
        prev_r = r;
    }
}

TEST_CASE("approximate rate is concave in power", "[mcs][property]")
{
    const McsApprox ap;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    for (int i = 0; i < 10000; ++i)
    {
        const double p = u(rng), q = u(rng), e = 1.0;
        const double mid = rate_approx(0.5 * (p + q), e, ap, 360e3);
        CHECK(mid >= 0.5 * (rate_approx(p, e, ap, 360e3) + rate_approx(q, e, ap, 360e3)) - 1e-6);
    }
}

TEST_CASE("approximate rate values", "[mcs]")
{
    const McsApprox ap;
    CHECK(rate_approx(1.0, 1.0, ap, 360e3) == Approx(233280.0));
    CHECK(rate_approx(0.0, 5.0, ap, 360e3) == 0.0);
    CHECK(rate_approx(1e12, 1.0, ap, 360e3) == Approx(1864800.0).epsilon(1e-12));
    CHECK(ap.cap_sinr() == Approx(std::pow(5.18 / 0.648, 2.0)));
    McsApprox bad = ap;
    bad.b = 1.5;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("cap-rate lower bound on subchannels", "[mcs]")
{
    CHECK(c_min(30e6, 360e3, 4, 5.18) == 5);
    CHECK(c_min(5e6, 360e3, 4, 5.18) == 1);
    CHECK(c_min(30e6, 360e3, 1, 5.18) == 17);
    CHECK(c_min(360e3 * 4 * 5.18, 360e3, 4, 5.18) == 1);
    CHECK(c_min(2 * 360e3 * 4 * 5.18, 360e3, 4, 5.18) == 2);
}

TEST_CASE("cap-rate bound monotonicity", "[mcs][property]")
{
    for (double mbr = 1e6; mbr < 1e8; mbr *= 1.3)
        for (int L = 1; L < 8; ++L)
        {
            CHECK(c_min(mbr, 360e3, L + 1, 5.18) <= c_min(mbr, 360e3, L, 5.18));
            CHECK(c_min(mbr, 360e3, L, 6.0) <= c_min(mbr, 360e3, L, 5.18));
            CHECK(c_min(mbr * 1.1, 360e3, L, 5.18) >= c_min(mbr, 360e3, L, 5.18));
        }
}

TEST_CASE("table CSV round trip and validation", "[mcs]")
{
    const auto dir = std::filesystem::temp_directory_path() / "fwa_mcs_test";
    std::filesystem::create_directories(dir);
    const auto t = McsTable::standard();
    std::ofstream(dir / "std.csv") << t.to_csv();
    CHECK(McsTable::load(dir / "std.csv") == t);
    std::ofstream(dir / "bad.csv") << "sinr_db,se_bps_hz\n5,1\n3,2\n";
    CHECK_THROWS(McsTable::load(dir / "bad.csv"));
    CHECK_THROWS(McsTable(std::vector<std::pair<double, double>>{}));
}
