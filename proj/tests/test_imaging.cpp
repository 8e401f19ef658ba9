#include "bayesedge/errors.hpp"
#include "bayesedge/image_io.hpp"
#include "bayesedge/imaging.hpp"

#include <doctest.h>
#include <png.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace bayesedge;
namespace fs = std::filesystem;

namespace
{
    GrayImage random_image(int h, int w, std::uint64_t seed)
    {
        return add_white_noise(GrayImage(GrayImage::Zero(h, w)), 1.0, seed);
    }

    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / "bayesedge_imaging_tests";
        fs::create_directories(dir);
        return dir / name;
    }

    void write_bytes(const fs::path &p, const std::string &bytes)
    {
        std::ofstream(p, std::ios::binary) << bytes;
    }
} // namespace

TEST_CASE("gaussian kernel length and normalization")
{
    const auto k = gaussian_kernel(2.0);
    CHECK(k.size() == 13);
    CHECK(gaussian_kernel(1.0).size() == 7);
    CHECK(gaussian_kernel(1.25).size() == 9);
    double total = 0.0;
    for (double v : k)
        total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(gaussian_kernel(0.0), InvalidArgument);
}

TEST_CASE("smoothing keeps constants and offsets")
{
    const GrayImage five = GrayImage::Constant(20, 30, 5.0);
    CHECK((gaussian_smooth(five, 2.0) - 5.0).abs().maxCoeff() < 1e-12);

    const GrayImage img = random_image(25, 31, 4);
    const GrayImage a = gaussian_smooth(GrayImage(img + 3.5), 1.5);
    const GrayImage b = gaussian_smooth(img, 1.5);
    CHECK((a - b - 3.5).abs().maxCoeff() < 1e-9);
    CHECK(a.rows() == 25);
    CHECK(a.cols() == 31);
}

TEST_CASE("impulse response matches the sampled Gaussian")
{
    GrayImage impulse = GrayImage::Zero(41, 41);
    impulse(20, 20) = 1.0;
    const double sigma = 2.0;
    const GrayImage out = gaussian_smooth(impulse, sigma);
    double norm = 0.0;
    for (int k = -6; k <= 6; ++k)
        norm += std::exp(-k * k / (2.0 * sigma * sigma));
    for (int dx = -10; dx <= 10; ++dx)
    {
        const double expected = std::abs(dx) > 6 ? 0.0 : std::exp(-dx * dx / (2.0 * sigma * sigma)) / (norm * norm);
        CHECK(std::abs(out(20, 20 + dx) - expected) < 1e-9);
    }
}

TEST_CASE("smoothing reduces the variance of white noise")
{
    const GrayImage img = random_image(64, 64, 9);
    CHECK(sample_variance(gaussian_smooth(img, 1.0)) < 0.5 * sample_variance(img));
}

TEST_CASE("reflect padding repeats the border pixel")
{
    CHECK(reflect_index(-1, 5) == 0);
    CHECK(reflect_index(-2, 5) == 1);
    CHECK(reflect_index(5, 5) == 4);
    CHECK(reflect_index(6, 5) == 3);
    CHECK(reflect_index(-7, 5) == 3);
    CHECK(reflect_index(3, 1) == 0);
}

TEST_CASE("standardize divides by the sample SD")
{
    GrayImage img(2, 2);
    img << 0.0, 4.0, 2.0, 6.0; // sample SD = sqrt(20/3)
    const double sd = std::sqrt(20.0 / 3.0);
    const GrayImage s = standardize(img);
    CHECK((s - img / sd).abs().maxCoeff() < 1e-15);
    CHECK(std::abs(std::sqrt(sample_variance(s)) - 1.0) < 1e-12);

    GrayImage sd2 = random_image(30, 30, 3);
    sd2 = sd2 / std::sqrt(sample_variance(sd2)) * 2.0;
    CHECK((standardize(sd2) - sd2 / 2.0).abs().maxCoeff() < 1e-12);

    const GrayImage unit = standardize(random_image(16, 16, 5));
    CHECK((standardize(unit) - unit).abs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(standardize(GrayImage(GrayImage::Constant(8, 8, 0.3))), DegenerateImage);
}

TEST_CASE("white noise")
{
    const GrayImage clean = GrayImage::Constant(512, 512, 0.25);
    CHECK((add_white_noise(clean, 0.0, 1) - clean).abs().maxCoeff() == 0.0);
    const GrayImage a = add_white_noise(clean, 0.7, 42);
    const GrayImage b = add_white_noise(clean, 0.7, 42);
    CHECK((a - b).abs().maxCoeff() == 0.0);
    CHECK(std::abs(std::sqrt(sample_variance(GrayImage(a - clean))) / 0.7 - 1.0) < 0.03);
    CHECK((add_white_noise(clean, 0.7, 43) - a).abs().maxCoeff() > 0.0);
    CHECK_THROWS_AS(add_white_noise(clean, -1.0, 0), InvalidArgument);
}

TEST_CASE("gradient samples on simple images")
{
    const GrayImage flat = GrayImage::Constant(9, 9, 0.4);
    const GradientSamples z = gradient_samples(flat, 4, 4, 1);
    CHECK(z.gx.size() == 3);
    CHECK(z.gx.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.gy.cwiseAbs().maxCoeff() == 0.0);

    GrayImage step = GrayImage::Zero(9, 10);
    step.rightCols(5).setOnes();
    const GradientSamples s = gradient_samples(step, 4, 4, 2);
    CHECK(s.gx.size() == 5);
    for (int j = 0; j < 5; ++j)
    {
        CHECK(s.gx(j) == 1.0);
        CHECK(s.gy(j) == 0.0);
    }

    GrayImage ramp(7, 7);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x)
            ramp(y, x) = x;
    const GradientSamples r = gradient_samples(ramp, 3, 3, 1);
    CHECK((r.gx.array() == 2.0).all());
    CHECK((r.gy.array() == 0.0).all());

    CHECK_THROWS_AS(gradient_samples(ramp, 0, 3, 1), OutOfBounds);
    CHECK_THROWS_AS(gradient_samples(ramp, 3, 5, 2), OutOfBounds);
    CHECK_THROWS_AS(gradient_samples(ramp, 3, 3, 0), InvalidArgument);
    CHECK_NOTHROW(gradient_samples(ramp, 2, 2, 2));
}

TEST_CASE("gradient samples swap under transposition")
{
    const GrayImage img = random_image(11, 13, 21);
    const GrayImage t = img.transpose();
    const Eigen::Matrix2d omega = estimate_omega(img);
    for (int y = 2; y < 9; ++y)
        for (int x = 2; x < 11; ++x)
        {
            const GradientSamples a = gradient_samples(img, x, y, 2, omega);
            const GradientSamples b = gradient_samples(t, y, x, 2, omega);
            CHECK((a.gx - b.gy).cwiseAbs().maxCoeff() == 0.0);
            CHECK((a.gy - b.gx).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("omega is twice the sample variance")
{
    const GrayImage unit = standardize(random_image(40, 40, 8));
    CHECK((estimate_omega(unit) - 2.0 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-9);

    const GrayImage img = random_image(20, 20, 2);
    const Eigen::Matrix2d o = estimate_omega(img);
    CHECK((estimate_omega(GrayImage(3.0 * img)) - 9.0 * o).cwiseAbs().maxCoeff() < 1e-9);

    const int n = 64;
    GrayImage board(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            board(y, x) = (x + y) % 2;
    const double N = n * n;
    const double v = 0.25 * N / (N - 1.0);
    CHECK((estimate_omega(board) - 2.0 * v * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

    // Flat images keep an invertible Omega through the variance floor.
    CHECK(estimate_omega(GrayImage(GrayImage::Constant(5, 5, 1.0)))(0, 0) == doctest::Approx(2e-8));
    CHECK_THROWS_AS(estimate_omega(GrayImage(GrayImage::Constant(1, 1, 1.0))), DegenerateImage);
}

TEST_CASE("PGM round trip at 8-bit precision")
{
    GrayImage img = random_image(17, 23, 6);
    img = (img - img.minCoeff()) / (img.maxCoeff() - img.minCoeff());
    const fs::path p = scratch("round.pgm");
    write_pgm(p, img);
    const GrayImage back = read_image(p);
    REQUIRE(back.rows() == 17);
    REQUIRE(back.cols() == 23);
    CHECK((back - img).abs().maxCoeff() <= 0.5 / 255.0 + 1e-12);
    write_pgm(p, back);
    CHECK((read_image(p) - back).abs().maxCoeff() == 0.0);
}

TEST_CASE("PGM variants and malformed files")
{
    const fs::path ascii = scratch("ascii.pgm");
    write_bytes(ascii, "P2\n# comment\n3 2\n4\n0 1 2\n3 4 0\n");
    const GrayImage a = read_image(ascii);
    CHECK(a(0, 2) == 0.5);
    CHECK(a(1, 1) == 1.0);

    const fs::path wide = scratch("wide.pgm");
    write_bytes(wide, std::string("P5 2 1 1000\n") + std::string("\x01\xF4\x03\xE8", 4));
    const GrayImage w = read_image(wide);
    CHECK(w(0, 0) == doctest::Approx(0.5));
    CHECK(w(0, 1) == 1.0);

    const fs::path mask = scratch("mask.pgm");
    Mask m = Mask::Zero(3, 4);
    m(1, 2) = 1;
    write_mask_pgm(mask, m);
    const GrayImage mread = read_image(mask);
    CHECK(mread(1, 2) == 1.0);
    CHECK(mread.sum() == 1.0);

    const fs::path truncated = scratch("truncated.pgm");
    write_bytes(truncated, "P5\n4 4\n255\nabc");
    CHECK_THROWS_AS(read_image(truncated), IoError);
    const fs::path junk = scratch("junk.pgm");
    write_bytes(junk, "hello world");
    CHECK_THROWS_AS(read_image(junk), IoError);
    CHECK_THROWS_AS(read_image(scratch("missing.pgm")), IoError);
    const fs::path over = scratch("over.pgm");
    write_bytes(over, "P2 2 1 9 3 12\n");
    CHECK_THROWS_AS(read_image(over), IoError);
}

TEST_CASE("grayscale PNG input")
{
    const fs::path p = scratch("gray.png");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = 3;
    image.height = 2;
    image.format = PNG_FORMAT_GRAY;
    const png_byte pixels[] = {0, 51, 102, 153, 204, 255};
    REQUIRE(png_image_write_to_file(&image, p.c_str(), 0, pixels, 0, nullptr));
    const GrayImage img = read_image(p);
    REQUIRE(img.rows() == 2);
    REQUIRE(img.cols() == 3);
    CHECK(img(0, 1) == doctest::Approx(0.2));
    CHECK(img(1, 2) == 1.0);
}
