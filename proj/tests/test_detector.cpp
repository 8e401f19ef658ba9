#include "bayesedge/detector.hpp"
#include "bayesedge/errors.hpp"
#include "bayesedge/eval.hpp"
#include "bayesedge/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bayesedge;

namespace
{
    DetectionConfig fine_config()
    {
        DetectionConfig cfg;
        cfg.sigma_s = 1.25;
        return cfg;
    }

    long count(const Mask &m) { return static_cast<long>((m != 0).count()); }
} // namespace

TEST_CASE("constant image gives a flat negative log-BF field")
{
    const ScalarField f = bf_map(GrayImage(GrayImage::Constant(12, 15, 0.7)), DetectionConfig{});
    CHECK(f.maxCoeff() - f.minCoeff() < 1e-12);
    CHECK(f(5, 5) < 0.0);
}

TEST_CASE("step edges carry more evidence than flat areas")
{
    const SyntheticImage step = step_image(20, 20, 10);
    const ScalarField f = bf_map(step.image, DetectionConfig{});
    CHECK(f(10, 9) > f(10, 4) + 1.0);
    CHECK(f(10, 10) > f(10, 15) + 1.0);
    CHECK(f(10, 9) == doctest::Approx(f(10, 10)));
}

TEST_CASE("bf_map agrees with a brute-force grid on random patches")
{
    const oracle::Grid2d grid = oracle::prior_grid(-2.0, 1.0, 1.0, 1.0, 8.0, 2000);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    for (int c = 0; c < 10; ++c)
    {
        GrayImage patch(5, 5);
        for (Eigen::Index i = 0; i < patch.size(); ++i)
            patch.data()[i] = normal(rng);
        // A ramp moves the interior differences away from zero.
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x)
                patch(y, x) += 0.6 * c * x - 0.3 * c * y;
        patch = standardize(patch);
        const double omega = 2.0 * sample_variance(patch);
        const ScalarField f = bf_map(patch, DetectionConfig{});
        for (int y = 1; y <= 3; ++y)
            for (int x = 1; x <= 3; ++x)
            {
                std::vector<double> gx, gy;
                for (int j = -1; j <= 1; ++j)
                {
                    gx.push_back(patch(y + j, x + 1) - patch(y + j, x - 1));
                    gy.push_back(patch(y + 1, x + j) - patch(y - 1, x + j));
                }
                const double expected = oracle::log_bf(grid, gx, gy, omega);
                CHECK(std::abs(std::expm1(f(y, x) - expected)) <= 1e-4);
            }
    }
}

TEST_CASE("bf_map rejects images smaller than the stencil")
{
    CHECK_THROWS_AS(bf_map(GrayImage(GrayImage::Zero(2, 8)), DetectionConfig{}), InvalidArgument);
    DetectionConfig bad;
    bad.beta = 0.0;
    CHECK_THROWS_AS(bf_map(GrayImage(GrayImage::Zero(8, 8)), bad), InvalidArgument);
}

TEST_CASE("log-BF field ignores intensity offsets")
{
    GrayImage img = square_image(32).image;
    img = add_white_noise(img, 0.1, 4);
    const ScalarField a = bf_map(img, DetectionConfig{});
    const ScalarField b = bf_map(GrayImage(img + 10.0), DetectionConfig{});
    CHECK((a - b).abs().maxCoeff() < 1e-8);
}

TEST_CASE("canny response")
{
    const DetectionConfig cfg;
    GrayImage flat = GrayImage::Constant(10, 10, 3.0);
    CHECK(canny_response(flat, cfg).abs().maxCoeff() == 0.0);

    GrayImage ramp(10, 12);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 12; ++x)
            ramp(y, x) = x;
    const ScalarField r = canny_response(ramp, cfg);
    CHECK(r(5, 5) == doctest::Approx(2.0));
    CHECK(r(0, 5) == 0.0);

    const GrayImage img = add_white_noise(GrayImage(GrayImage::Zero(13, 9)), 1.0, 5);
    const ScalarField t = canny_response(GrayImage(img.transpose()), cfg);
    CHECK((t - canny_response(img, cfg).transpose()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("non-maximum suppression")
{
    ScalarField spike = ScalarField::Zero(5, 5);
    spike(2, 2) = 3.0;
    spike(2, 3) = 1.0;
    const ScalarField s = non_max_suppress(spike);
    CHECK(s(2, 2) == 3.0);
    CHECK(s(2, 3) == 0.0);

    const ScalarField flat = ScalarField::Constant(4, 4, 1.5);
    CHECK((non_max_suppress(flat) == 1.5).all());

    ScalarField pair = ScalarField::Zero(5, 6);
    pair(2, 2) = 2.0;
    pair(2, 3) = 2.0;
    pair(0, 0) = -1.0;
    const ScalarField p = non_max_suppress(pair);
    CHECK(p(2, 2) == 2.0);
    CHECK(p(2, 3) == 2.0);
    CHECK(p(1, 2) == -1.0);
    CHECK(p(4, 5) == 0.0); // a corner with no larger neighbour survives

    ScalarField bad = ScalarField::Zero(3, 3);
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(non_max_suppress(bad), InvalidArgument);
}

TEST_CASE("k-means threshold examples")
{
    CHECK(kmeans_threshold(std::vector<double>{0.1, 0.2, 0.9, 1.0}, 0) == 0.2);
    CHECK(kmeans_threshold(std::vector<double>{0.0, 0.0, 0.0, 10.0}, 0) == 0.0);
    CHECK_THROWS_AS(kmeans_threshold(std::vector<double>{2.0, 2.0, 2.0}, 0), DegenerateField);
    CHECK_THROWS_AS(kmeans_threshold(std::vector<double>{}, 0), DegenerateField);
    CHECK_THROWS_AS(kmeans_threshold(std::vector<double>{1.0, std::nan("")}, 0), InvalidArgument);

    std::mt19937_64 rng(3);
    for (int c = 0; c < 20; ++c)
    {
        std::normal_distribution<double> low(0.0, 1.0), high(4.0 + c * 0.2, 0.5 + 0.05 * c);
        std::vector<double> v;
        for (int i = 0; i < 150 + 10 * c; ++i)
            v.push_back(i % 3 == 0 ? high(rng) : low(rng));
        CHECK(kmeans_threshold(v, 1) == oracle::best_split_threshold(v));
    }
}

TEST_CASE("k-means threshold shifts with the field")
{
    const ScalarField f = add_white_noise(ScalarField(ScalarField::Zero(20, 20)), 1.0, 12);
    const double base = kmeans_threshold(f, 0);
    CHECK(kmeans_threshold(ScalarField(f + 7.0), 0) == doctest::Approx(base + 7.0).epsilon(1e-12));
}

TEST_CASE("bayes detector on clean images")
{
    const DetectionConfig cfg;
    const EdgeMap empty = detect_bayes(GrayImage(GrayImage::Constant(24, 24, 0.5)), cfg, 0);
    CHECK(count(empty.mask) == 0);

    const SyntheticImage step = step_image(32, 24, 16);
    const EdgeMap e = detect_bayes(step.image, cfg, 0);
    CHECK(count(e.mask) > 0);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x)
            if (e.mask(y, x))
                CHECK(std::abs(x - 15.5) <= 1.5);
}

TEST_CASE("edges are non-maximum survivors above the threshold")
{
    const GrayImage img = add_white_noise(square_image(48, 1.0).image, 0.3, 8);
    const BayesDetection d = run_bayes_detector(img, fine_config(), 8);
    for (int y = 0; y < img.rows(); ++y)
        for (int x = 0; x < img.cols(); ++x)
            if (d.edges.mask(y, x))
            {
                CHECK(d.suppressed(y, x) == d.log_bf(y, x));
                CHECK(d.log_bf(y, x) > d.edges.threshold);
            }
    CHECK(count(d.edges.mask) > 0);
}

TEST_CASE("canny detector")
{
    const SyntheticImage step = step_image(32, 24, 16);
    const EdgeMap e = detect_canny(step.image, DetectionConfig{});
    for (int y = 3; y < 21; ++y)
    {
        int row = 0;
        for (int x = 0; x < 32; ++x)
            if (e.mask(y, x))
            {
                ++row;
                CHECK(std::abs(x - 15.5) <= 1.5);
            }
        CHECK(row == 1);
    }
    const GrayImage noise = add_white_noise(GrayImage(GrayImage::Zero(40, 40)), 1.0, 2);
    CHECK(count(detect_canny(noise, DetectionConfig{}).mask) > 0);
}

TEST_CASE("bayes detector is more selective than canny on flat noise")
{
    const GrayImage noise = add_white_noise(GrayImage(GrayImage::Zero(64, 64)), 1.0, 19);
    const long bayes = count(detect_bayes(noise, DetectionConfig{}, 19).mask);
    const long canny = count(detect_canny(noise, DetectionConfig{}).mask);
    CHECK(bayes < canny);
}

TEST_CASE("square at low noise is recovered by both detectors")
{
    const SyntheticImage sq = square_image(64, 2.0);
    const DetectionConfig cfg = fine_config();
    const GrayImage noisy = add_white_noise(sq.image, 0.2, 31);
    const PixelList b = mask_pixels(detect_bayes(noisy, cfg, 31).mask);
    const PixelList c = mask_pixels(detect_canny(noisy, cfg).mask);
    CHECK(metric_rs_rt(b, sq.truth).r_t >= 0.9);
    CHECK(metric_rs_rt(c, sq.truth).r_t >= 0.9);
}

TEST_CASE("field CSV")
{
    ScalarField f(1, 2);
    f << 0.5, -1.25;
    std::ostringstream os;
    write_field_csv(os, f);
    CHECK(os.str().rfind("x,y,log_bf\n", 0) == 0);
    CHECK(os.str().find("1,0,-1.25") != std::string::npos);
}
