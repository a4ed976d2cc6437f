// SPDX-License-Identifier: Apache-2.0

#include "fwa/channel.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

using namespace fwa;
using Catch::Approx;

namespace {

CellScenario no_shadow()
{
    CellScenario c;
    c.shadowing = false;
    return c;
}

} // namespace

TEST_CASE("positions cover the annulus", "[channel]")
{
    CellScenario cell;
    Rng rng = make_rng(1, {1});
    const auto homes = sample_positions(cell, 20000, rng);
    double inner = 0;
    for (const auto &h : homes)
    {
        REQUIRE(h.distance_2d_m >= 35.0);
        REQUIRE(h.distance_2d_m <= 1500.0);
        CHECK(std::hypot(h.x_m, h.y_m) == Approx(h.distance_2d_m));
        CHECK(h.distance_3d_m == Approx(std::hypot(h.distance_2d_m, 95.0)));
        inner += h.distance_2d_m < 750.0 ? 1 : 0;
    }
    // uniform by area: P(d < R/2) = (750^2 - 35^2) / (1500^2 - 35^2)
    CHECK(inner / homes.size() == Approx((750.0 * 750 - 35 * 35) / (1500.0 * 1500 - 35 * 35)).margin(0.015));
    CHECK_THROWS(sample_positions(cell, 0, rng));
}

TEST_CASE("3D distance at the minimum distance", "[channel]")
{
    CellScenario cell;
    cell.radius_m = 35.0;
    Rng rng = make_rng(1, {2});
    const auto h = sample_positions(cell, 1, rng).front();
    CHECK(h.distance_3d_m == Approx(101.24).margin(0.01));
}

TEST_CASE("RMa LoS path loss", "[channel]")
{
    SystemSetting s;
    CellScenario cell = no_shadow();
    CHECK(rma_los_path_loss_db(1000.0, 5.0, 3.5e9) == Approx(105.4).margin(0.1));
    CHECK(rma_breakpoint_m(cell, s) == Approx(2 * std::numbers::pi * 100 * 5 * 3.5e9 / 3e8));

    HomePlacement h;
    h.distance_2d_m = 995.0;
    h.distance_3d_m = 1000.0;
    Rng rng = make_rng(1, {3});
    const double beta = rma_los_path_loss(h, cell, s, rng);
    CHECK(beta == Approx(std::pow(10.0, -rma_los_path_loss_db(1000.0, 5.0, 3.5e9) / 10.0)));
    CHECK(h.shadowing_db == 0.0);

    h.distance_2d_m = 5.0;
    CHECK_THROWS_AS(rma_los_path_loss(h, cell, s, rng), std::domain_error);
    h.distance_2d_m = 40000.0;
    CHECK_THROWS_AS(rma_los_path_loss(h, cell, s, rng), std::domain_error);
}

TEST_CASE("shadowing is zero mean with the configured spread", "[channel][property]")
{
    SystemSetting s;
    CellScenario cell;
    HomePlacement h;
    h.distance_2d_m = 995.0;
    h.distance_3d_m = 1000.0;
    const double det = rma_los_path_loss_db(1000.0, 5.0, 3.5e9);
    Rng rng = make_rng(1, {4});
    double sum = 0, sq = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
    {
        rma_los_path_loss(h, cell, s, rng);
        const double d = h.path_loss_db - det;
        sum += d;
        sq += d * d;
    }
    CHECK(std::abs(sum / n) < 0.2);
    CHECK(std::sqrt(sq / n) == Approx(4.0).margin(0.15));
}

TEST_CASE("UPA geometry", "[channel]")
{
    const auto p4 = upa_positions(4, 0.2, Point3(0, 0, 5));
    REQUIRE(p4.size() == 4);
    CHECK((p4[0] - p4[1]).norm() == Approx(0.2));
    CHECK((p4[0] - p4[2]).norm() == Approx(0.2));
    CHECK((p4[0] - p4[3]).norm() == Approx(0.2 * std::sqrt(2.0)));
    CHECK(((p4[0] + p4[3]) / 2 - Point3(0, 0, 5)).norm() == Approx(0.0).margin(1e-12));

    const double lambda = 3e8 / 3.5e9;
    const auto p64 = upa_positions(64, 0.5 * lambda, Point3::Zero());
    CHECK((p64[0] - p64[1]).norm() == Approx(0.04286).margin(1e-5));
    CHECK((p64[0] - p64[8]).norm() == Approx(0.04286).margin(1e-5));

    const auto p1 = upa_positions(1, 0.3, Point3(1, 2, 3));
    REQUIRE(p1.size() == 1);
    CHECK(p1[0] == Point3(1, 2, 3));

    CHECK(upa_shape(128).rows == 8);
    CHECK(upa_shape(128).cols == 16);
    CHECK(upa_shape(8).rows == 2);
    CHECK(upa_shape(8).cols == 4);
    CHECK_THROWS(upa_positions(3, 0.1, Point3::Zero()));
}

TEST_CASE("exponential correlation matrices", "[channel]")
{
    CHECK(correlation_matrix(16, 0.0).isApprox(RMatrix::Identity(16, 16)));
    const auto r = correlation_matrix(4, 0.4);
    CHECK(r(0, 1) == Approx(0.4));
    CHECK(r(0, 2) == Approx(0.4));
    CHECK(r(0, 3) == Approx(0.16));
    CHECK(r(0, 0) == 1.0);
    CHECK_THROWS(correlation_matrix(4, 1.2));
}

TEST_CASE("correlation matrices are PSD and their roots square back", "[channel][property]")
{
    for (int m : {1, 4, 8, 16, 64, 128})
        for (double phi : {0.0, 0.01, 0.097, 0.4, 0.9, 1.0})
        {
            const auto r = correlation_matrix(m, phi);
            Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
            const auto s = psd_sqrt(r);
            CHECK((s * s - r).cwiseAbs().maxCoeff() < 1e-8);
            CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        }
    RMatrix bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(psd_sqrt(bad), std::domain_error);
}

TEST_CASE("LoS matrix", "[channel]")
{
    const std::vector<Point3> a{Point3(0, 0, 0)};
    const std::vector<Point3> u{Point3(0, 0, 0)};
    const auto h = los_matrix(a, u, 0.1);
    CHECK(h(0, 0).real() == Approx(1.0));
    CHECK(h(0, 0).imag() == Approx(0.0).margin(1e-15));

    const auto bs = upa_positions(16, 0.05, Point3(0, 0, 100));
    const auto hm = upa_positions(4, 0.2, Point3(500, 0, 5));
    const auto g = los_matrix(bs, hm, 3e8 / 3.5e9);
    CHECK(g.rows() == 4);
    CHECK(g.cols() == 16);
    CHECK((g.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("Rician limit: tap 1 equals the scaled LoS matrix", "[channel]")
{
    SystemSetting s;
    CellScenario cell = no_shadow();
    ChannelModel model(s, cell);
    Rng rng = make_rng(2, {1});
    auto p = sample_positions(cell, 1, rng).front();
    p.rician_factor_linear = std::numeric_limits<double>::infinity();
    rma_los_path_loss(p, cell, s, rng);
    const auto ua = model.home_antennas(p);
    const CMatrix los = los_matrix(model.bs_antennas(), ua, s.wavelength_m());
    const auto taps = sample_taps(p, los, psd_sqrt(correlation_matrix(64, 0.4)), psd_sqrt(correlation_matrix(4, 0.01)),
                                  TapProfile::standard(), rng);
    const CMatrix expect = std::sqrt(0.9209 * p.large_scale_gain) * los;
    CHECK((taps.taps[0] - expect).norm() <= 1e-12 * expect.norm());
}

TEST_CASE("frequency response", "[channel]")
{
    SystemSetting s;
    CellScenario cell = no_shadow();
    Rng rng = make_rng(3, {1});

    ChannelModel flat(s, cell, TapProfile::flat());
    const auto hf = flat.sample_homes(1, rng).front();
    const double n0 = flat.channel(hf, 0).norm();
    for (int c = 1; c < s.subchannel_count; ++c)
        CHECK(flat.channel(hf, c).norm() == Approx(n0).epsilon(1e-12));

    ChannelModel model(s, cell);
    const auto h = model.sample_homes(1, rng).front();
    CMatrix sum = CMatrix::Zero(4, 64);
    for (const auto &t : h.taps.taps)
        sum += t;
    CHECK((model.channel(h, 0) - sum).norm() <= 1e-12 * sum.norm());
    double lo = 1e300, hi = 0;
    for (int c = 0; c < s.subchannel_count; ++c)
    {
        lo = std::min(lo, model.channel(h, c).norm());
        hi = std::max(hi, model.channel(h, c).norm());
    }
    CHECK(hi > lo * (1 + 1e-6));

    // delay 51.33 ns times 25 MHz gives 1.283 samples
    TapSet one;
    one.taps = {CMatrix::Identity(2, 2)};
    one.delays_ns = {51.33};
    one.powers = {1.0};
    const auto g = channel_at_subchannel(one, 1, 65, 25e6);
    CHECK(std::arg(g(0, 0)) == Approx(-2 * std::numbers::pi * 1.283 / 65).epsilon(1e-3));
    CHECK_THROWS(channel_at_subchannel(one, 65, 65, 25e6));
}

TEST_CASE("channel energy and BS-side correlation moments", "[channel][property]")
{
    SystemSetting s;
    CellScenario cell = no_shadow();
    ChannelModel model(s, cell);
    Rng rng = make_rng(4, {1});
    double ratio = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i)
    {
        const auto h = model.sample_homes(1, rng).front();
        const CMatrix g = model.channel(h, i % s.subchannel_count);
        ratio += g.squaredNorm() / (h.placement.large_scale_gain * 4 * 64);
    }
    CHECK(ratio / n == Approx(1.0).margin(0.03));

    CellScenario scat = no_shadow();
    scat.rician_mean_db = -200;
    scat.rician_std_db = 0;
    ChannelModel rayleigh(s, scat, TapProfile::flat());
    cplx adj = 0;
    double diag = 0;
    for (int i = 0; i < n; ++i)
    {
        const auto h = rayleigh.sample_homes(1, rng).front();
        const CMatrix g = rayleigh.channel(h, 0) / std::sqrt(h.placement.large_scale_gain);
        const CMatrix cov = g.adjoint() * g;
        adj += cov(0, 1);
        diag += cov(0, 0).real();
    }
    CHECK(adj.real() / diag == Approx(0.4).margin(0.04));
}

TEST_CASE("without shadowing farther homes never have larger gain", "[channel][property]")
{
    SystemSetting s;
    CellScenario cell = no_shadow();
    cell.radius_m = 10000;
    ChannelModel model(s, cell);
    Rng rng = make_rng(5, {1});
    auto homes = model.sample_homes(500, rng);
    std::sort(homes.begin(), homes.end(),
              [](const Home &a, const Home &b) { return a.placement.distance_2d_m < b.placement.distance_2d_m; });
    for (std::size_t i = 1; i < homes.size(); ++i)
        CHECK(homes[i].placement.large_scale_gain <= homes[i - 1].placement.large_scale_gain);
}

TEST_CASE("same seed gives bitwise identical taps", "[channel][property]")
{
    SystemSetting s;
    CellScenario cell;
    ChannelModel model(s, cell);
    Rng a = make_rng(9, {1, 2});
    Rng b = make_rng(9, {1, 2});
    const auto ha = model.sample_homes(5, a);
    const auto hb = model.sample_homes(5, b);
    for (std::size_t k = 0; k < ha.size(); ++k)
        for (std::size_t d = 0; d < ha[k].taps.taps.size(); ++d)
            CHECK(ha[k].taps.taps[d] == hb[k].taps.taps[d]);
    Rng c = make_rng(10, {1, 2});
    CHECK(model.sample_homes(1, c).front().taps.taps[0] != ha.front().taps.taps[0]);
}
