#include "bayesedge/errors.hpp"
#include "bayesedge/eval.hpp"
#include "bayesedge/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace bayesedge;

namespace
{
    std::vector<std::pair<int, int>> pairs(const PixelList &p)
    {
        std::vector<std::pair<int, int>> out;
        for (const Pixel &q : p)
            out.emplace_back(q.x, q.y);
        return out;
    }

    PixelList random_pixels(std::mt19937_64 &rng, int count, int extent)
    {
        std::uniform_int_distribution<int> c(0, extent - 1);
        PixelList out(static_cast<std::size_t>(count));
        for (auto &p : out)
            p = {c(rng), c(rng)};
        return out;
    }
} // namespace

TEST_CASE("metric examples")
{
    const PixelList truth{{0, 0}, {10, 0}};
    const MetricPair exact = metric_rs_rt(truth, truth, 1.0);
    CHECK(exact.r_s == 1.0);
    CHECK(exact.r_t == 1.0);

    const MetricPair half = metric_rs_rt(PixelList{{0, 3}, {50, 50}}, truth, 3.0);
    CHECK(half.r_s == 0.5);
    CHECK(half.r_t == 0.5);
    CHECK(half.kappa == 3.0);

    // The tolerance is inclusive: a (3, 3) offset is exactly sqrt(18) away.
    const MetricPair diag = metric_rs_rt(PixelList{{3, 3}}, PixelList{{0, 0}});
    CHECK(diag.r_s == 1.0);
    CHECK(metric_rs_rt(PixelList{{3, 4}}, PixelList{{0, 0}}).r_s == 0.0);

    const MetricPair none = metric_rs_rt(PixelList{}, truth);
    CHECK(none.r_s == 1.0);
    CHECK(none.r_t == 0.0);

    CHECK_THROWS_AS(metric_rs_rt(truth, PixelList{}), EmptyTruth);
    CHECK_THROWS_AS(metric_rs_rt(truth, truth, 0.0), InvalidArgument);
}

TEST_CASE("metrics agree with brute force on random instances")
{
    std::mt19937_64 rng(6);
    for (int c = 0; c < 100; ++c)
    {
        const PixelList s = random_pixels(rng, 1 + c % 37, 40);
        const PixelList t = random_pixels(rng, 1 + (c * 7) % 29, 40);
        const double kappa = 0.5 + 0.1 * c;
        const MetricPair m = metric_rs_rt(s, t, kappa);
        const auto [rs, rt] = oracle::metrics(pairs(s), pairs(t), kappa);
        CHECK(m.r_s == rs);
        CHECK(m.r_t == rt);

        // Swapping roles swaps the two scores.
        const MetricPair swapped = metric_rs_rt(t, s, kappa);
        CHECK(swapped.r_s == m.r_t);
        CHECK(swapped.r_t == m.r_s);

        const MetricPair wider = metric_rs_rt(s, t, kappa + 1.0);
        CHECK(wider.r_s >= m.r_s);
        CHECK(wider.r_t >= m.r_t);
    }
}

TEST_CASE("mask pixels are listed in raster order")
{
    Mask m = Mask::Zero(3, 4);
    m(0, 3) = 1;
    m(2, 1) = 1;
    const PixelList p = mask_pixels(m);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == Pixel{3, 0});
    CHECK(p[1] == Pixel{1, 2});
    CHECK(to_string(Detector::canny) == "canny");
}

TEST_CASE("noise sweep is deterministic and complete")
{
    const SyntheticImage sq = square_image(32, 2.0);
    SweepConfig cfg;
    cfg.sds = {0.2, 0.8};
    cfg.runs = 3;
    cfg.detection.sigma_s = 1.25;
    cfg.seed = 11;
    const auto a = run_noise_sweep(sq.image, sq.truth, cfg);
    const auto b = run_noise_sweep(sq.image, sq.truth, cfg);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].sd == b[i].sd);
        CHECK(a[i].metrics.r_s == b[i].metrics.r_s);
        CHECK(a[i].metrics.r_t == b[i].metrics.r_t);
        CHECK(a[i].detector == (i % 2 ? Detector::canny : Detector::bayes));
        CHECK(a[i].run == static_cast<int>(i / 2) % 3);
    }
    CHECK(a[0].sd == 0.2);
    CHECK(a[11].sd == 0.8);

    const auto summary = summarize_sweep(a);
    REQUIRE(summary.size() == 4);
    CHECK(summary[0].mean_r_t == doctest::Approx((a[0].metrics.r_t + a[2].metrics.r_t + a[4].metrics.r_t) / 3.0));

    std::ostringstream os;
    write_sweep_csv(os, a);
    CHECK(os.str().rfind("sd,run,detector,r_s,r_t,kappa\n0.2,0,bayes,", 0) == 0);

    cfg.runs = 0;
    CHECK_THROWS_AS(run_noise_sweep(sq.image, sq.truth, cfg), InvalidArgument);
}

TEST_CASE("noise-free step is recovered")
{
    const SyntheticImage step = step_image(40, 30, 20, 2.0);
    SweepConfig cfg;
    cfg.sds = {0.0};
    cfg.runs = 1;
    const auto rows = run_noise_sweep(step.image, step.truth, cfg);
    REQUIRE(rows.size() == 2);
    for (const auto &r : rows)
        CHECK(r.metrics.r_t >= 0.95);
}
