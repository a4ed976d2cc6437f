// SPDX-License-Identifier: Apache-2.0

#include "fwa/study.hpp"
#include "toy.hpp"

#include <catch_amalgamated.hpp>

using namespace fwa;
using Catch::Approx;

TEST_CASE("weighted sum rate", "[study][wsr]")
{
    CHECK(weighted_sum_rate(0.5, 100.0, 50.0) == Approx(75.0));
    CHECK(weighted_sum_rate(1.0, 100.0, 50.0) == Approx(100.0));
    CHECK(weighted_sum_rate(0.0, 100.0, 50.0) == Approx(50.0));
    CHECK_THROWS_AS(weighted_sum_rate(1.5, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(weighted_sum_rate(-0.1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("evaluate_direction on the toy cell", "[study][toy]")
{
    const auto sc = toy::scenario(6e6, 1e6);
    const auto model = toy::model(sc);
    Rng rng = make_rng(5, {1});
    const auto homes = model.sample_homes(10, rng);
    Rng g = make_rng(5, {2});
    const auto out = evaluate_direction(model, sc, homes, Direction::downlink, 1, 1, g);
    const double r = toy::top_prb_rate(sc);
    CHECK(out.min_rate == Approx(6 * r));
    CHECK(out.sum_rate == Approx(65 * r));

    Rng g2 = make_rng(5, {3});
    const auto none = evaluate_direction(model, sc, model.sample_homes(70, rng), Direction::uplink, 1, 1, g2);
    CHECK(none.min_rate == 0.0);
}

TEST_CASE("feasibility fraction extremes", "[study]")
{
    auto sc = toy::scenario(6e6, 1e6);
    const auto model = toy::model(sc);
    const Configuration v{3, 1, 1, 1};
    CHECK(feasibility_fraction(model, sc, 16, v, 4) == 1.0);
    CHECK(feasibility_fraction(model, sc, 17, v, 4) == 0.0);
    CHECK(feasibility_fraction(model, sc, 70, v, 4) == 0.0);

    Scenario base;
    base.system.mbr_dl_bps = 1e-9;
    base.system.mbr_ul_bps = 1e-9;
    base.cell.realization_count = 2;
    const ChannelModel bm(base.system, base.cell);
    CHECK(feasibility_fraction(bm, base, 5, {10, 2, 2, 4}, 2) == 1.0);
}

TEST_CASE("brute force equals the closed form on the toy cell", "[study][toy][validation]")
{
    for (auto [d, u] : {std::pair{6e6, 1e6}, {30e6, 5e6}, {10e6, 10e6}})
    {
        const auto sc = toy::scenario(d, u);
        const auto model = toy::model(sc);
        const int expect = toy::user_limit(sc);
        REQUIRE(expect >= 2);
        const auto rep = brute_force_limit(model, sc, expect - 1, 1);
        INFO("mbr " << d << " / " << u);
        CHECK(rep.brute_force_limit == expect);
        CHECK_FALSE(rep.start_failed);
        CHECK_FALSE(rep.budget_exhausted);
        REQUIRE(rep.steps.size() == 3);
        CHECK(rep.steps[0].qualifying.has_value());
        CHECK(rep.steps[1].qualifying.has_value());
        CHECK_FALSE(rep.steps[2].qualifying.has_value());

        const auto plan = optimal_configuration(model, sc);
        CHECK(plan.user_limit == rep.brute_force_limit);
    }
}

TEST_CASE("brute force flags a start above the limit", "[study][validation]")
{
    const auto sc = toy::scenario(6e6, 1e6);
    const auto rep = brute_force_limit(toy::model(sc), sc, 20, 1);
    CHECK(rep.start_failed);
    CHECK(rep.brute_force_limit == 19);
    CHECK(rep.steps.size() == 1);

    const auto capped = brute_force_limit(toy::model(sc), sc, 2, 1, 1, 3);
    CHECK(capped.budget_exhausted);
    CHECK(capped.brute_force_limit == 4);
    CHECK_THROWS_AS(brute_force_limit(toy::model(sc), sc, 0, 1), std::invalid_argument);
}

TEST_CASE("single feasible configuration wins for any alpha", "[study][operate][toy]")
{
    const auto sc = toy::scenario(6e6, 1e6);
    const auto model = toy::model(sc);
    const Configuration only{3, 1, 1, 1};
    for (double alpha : {0.0, 0.5, 1.0})
    {
        const auto rep = best_operating_config(model, sc, 16, alpha, 1);
        REQUIRE(rep.best.has_value());
        CHECK(rep.best->config == only);
        CHECK(rep.frontier.size() == 1);
        const double r = toy::top_prb_rate(sc);
        CHECK(rep.best->sr_dl == Approx(65 * r * 17 / 20));
        CHECK(rep.best->sr_ul == Approx(65 * r * 3 / 20));
    }
    const auto none = best_operating_config(model, sc, 17, 0.5, 1);
    CHECK_FALSE(none.best.has_value());
    CHECK(none.frontier.empty());
}

TEST_CASE("operating study on a baseline cell", "[study][operate]")
{
    Scenario sc;
    sc.cell.radius_m = 5000.0;
    sc.cell.realization_count = 4;
    sc.seed = 3;
    const ChannelModel model(sc.system, sc.cell);
    const Configuration planning{5, 3, 3, 4};
    const auto samples = sample_operation(model, sc, 6, 4, 4, stream::operation, 1);

    const auto half = best_operating_config(samples, sc, 0.5, planning);
    REQUIRE(half.planning.has_value());
    if (half.planning->feasible && half.best)
        CHECK(half.best->wsr >= half.planning->wsr - 1e-9);

    for (const auto &p : half.frontier)
    {
        CHECK(p.feasible);
        CHECK(p.sr_dl >= 6 * sc.system.mbr_dl_bps * (1 - 1e-9));
        CHECK(p.sr_ul >= 6 * sc.system.mbr_ul_bps * (1 - 1e-9));
        CHECK(p.wsr == Approx(0.5 * p.sr_dl + 0.5 * p.sr_ul));
        if (half.best)
            CHECK(p.wsr <= half.best->wsr + 1e-9);
    }

    // Best WSR is the upper envelope of affine functions of alpha, hence convex.
    std::vector<double> best;
    for (int i = 0; i <= 10; ++i)
    {
        const auto rep = best_operating_config(samples, sc, i / 10.0);
        best.push_back(rep.best ? rep.best->wsr : 0.0);
    }
    if (half.best)
        for (int i = 1; i < 10; ++i)
            CHECK(best[i] <= 0.5 * (best[i - 1] + best[i + 1]) + 1e-6 * best[i]);
}

TEST_CASE("group sizes above U reuse the single-group outcome", "[study]")
{
    Scenario sc;
    sc.cell.radius_m = 5000.0;
    sc.seed = 9;
    const ChannelModel model(sc.system, sc.cell);
    const auto s = sample_operation(model, sc, 3, 4, 2, stream::operation, 1);
    for (const auto &r : s.realizations)
        for (int S = 4; S <= 16; ++S)
        {
            CHECK(r.dl[S - 1].min_rate == r.dl[2].min_rate);
            CHECK(r.ul[S - 1].sum_rate == r.ul[2].sum_rate);
        }
    const auto par = sample_operation(model, sc, 3, 4, 2, stream::operation, 2);
    for (std::size_t w = 0; w < s.realizations.size(); ++w)
        for (int S = 1; S <= 16; ++S)
            CHECK(par.realizations[w].dl[S - 1].sum_rate == s.realizations[w].dl[S - 1].sum_rate);
    CHECK_THROWS_AS(sample_operation(model, sc, 3, 4, 1, stream::operation, 1, {17}), std::invalid_argument);
}

TEST_CASE("feasibility does not grow with the home count", "[study]")
{
    Scenario sc;
    sc.cell.radius_m = 5000.0;
    sc.seed = 4;
    const ChannelModel model(sc.system, sc.cell);
    const Configuration v{5, 3, 3, 4};
    const double few = feasibility_fraction(model, sc, 3, v, 6);
    const double many = feasibility_fraction(model, sc, 40, v, 6);
    CHECK(few >= many);
    CHECK(many == 0.0);
}
