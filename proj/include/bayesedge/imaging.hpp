#pragma once

#include "errors.hpp"
#include "parallel.hpp"
#include "types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bayesedge
{
    /// Sampled Gaussian taps normalized to unit sum. Length is the smallest odd
    /// integer >= 6 sigma + 1.
    template <typename Scalar>
    std::vector<Scalar> gaussian_kernel(Scalar sigma_s)
    {
        if (!(sigma_s > Scalar(0)) || !std::isfinite(static_cast<double>(sigma_s)))
            throw InvalidArgument("smoothing sigma must be positive");
        int length = static_cast<int>(std::ceil(6.0 * static_cast<double>(sigma_s) + 1.0));
        if (length % 2 == 0)
            ++length;
        const int radius = length / 2;
        std::vector<Scalar> taps(static_cast<std::size_t>(length));
        Scalar total(0);
        for (int k = -radius; k <= radius; ++k)
        {
            const Scalar w = std::exp(-Scalar(k * k) / (Scalar(2) * sigma_s * sigma_s));
            taps[static_cast<std::size_t>(k + radius)] = w;
            total += w;
        }
        for (auto &w : taps)
            w /= total;
        return taps;
    }

    // Symmetric reflection about the edge (the border pixel is repeated).
    inline int reflect_index(int i, int n)
    {
        if (n == 1)
            return 0;
        const int period = 2 * n;
        i %= period;
        if (i < 0)
            i += period;
        return i < n ? i : period - 1 - i;
    }

    /// Separable Gaussian convolution with reflect padding.
    template <typename Scalar>
    Image<Scalar> gaussian_smooth(const Image<Scalar> &img, Scalar sigma_s)
    {
        const auto taps = gaussian_kernel(sigma_s);
        const int radius = static_cast<int>(taps.size()) / 2;
        const int w = width(img), h = height(img);

        Image<Scalar> rows(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
            {
                Scalar acc(0);
                for (int k = -radius; k <= radius; ++k)
                    acc += taps[static_cast<std::size_t>(k + radius)] * img(y, reflect_index(x + k, w));
                rows(y, x) = acc;
            }

        Image<Scalar> out(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
            {
                Scalar acc(0);
                for (int k = -radius; k <= radius; ++k)
                    acc += taps[static_cast<std::size_t>(k + radius)] * rows(reflect_index(y + k, h), x);
                out(y, x) = acc;
            }
        return out;
    }

    template <typename Scalar>
    Scalar sample_variance(const Image<Scalar> &img)
    {
        if (img.size() < 2)
            throw DegenerateImage("sample variance needs at least two pixels");
        const Scalar mean = img.mean();
        return (img - mean).square().sum() / Scalar(img.size() - 1);
    }

    /// Divides by the sample standard deviation so the output has unit SD.
    template <typename Scalar>
    Image<Scalar> standardize(const Image<Scalar> &img)
    {
        const Scalar sd = std::sqrt(sample_variance(img));
        if (!(sd >= Scalar(1e-12)))
            throw DegenerateImage("image is constant; standard deviation below 1e-12");
        return img / sd;
    }

    template <typename Scalar>
    Image<Scalar> add_white_noise(const Image<Scalar> &img, Scalar sd, std::uint64_t seed)
    {
        if (!(sd >= Scalar(0)) || !std::isfinite(static_cast<double>(sd)))
            throw InvalidArgument("noise standard deviation must be nonnegative");
        if (sd == Scalar(0))
            return img;
        Rng rng = make_rng(seed, 0);
        std::normal_distribution<double> normal(0.0, static_cast<double>(sd));
        Image<Scalar> out = img;
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out.data()[i] += static_cast<Scalar>(normal(rng));
        return out;
    }

    /// Omega = 2 v I with v the global sample variance, floored at 1e-8.
    template <typename Scalar>
    Eigen::Matrix2d estimate_omega(const Image<Scalar> &img)
    {
        const double v = std::max(static_cast<double>(sample_variance(img)), 1e-8);
        return 2.0 * v * Eigen::Matrix2d::Identity();
    }

    // Paired directional differences at one pixel, j = -n..n.
    struct GradientSamples
    {
        Eigen::VectorXd gx;
        Eigen::VectorXd gy;
        Eigen::Matrix2d omega = Eigen::Matrix2d::Identity();

        int n() const { return static_cast<int>(gx.size() / 2); }
        Eigen::Vector2d mean() const { return {gx.mean(), gy.mean()}; }
    };

    // (x, y) has n pixels on every side, so all 2n+1 differences exist.
    inline bool is_interior(int w, int h, int x, int y, int n)
    {
        const int margin = std::max(n, 1);
        return x >= margin && y >= margin && x < w - margin && y < h - margin;
    }

    template <typename Scalar>
    GradientSamples gradient_samples(const Image<Scalar> &img, int x, int y, int n, const Eigen::Matrix2d &omega)
    {
        if (n < 1)
            throw InvalidArgument("difference half-width n must be positive");
        if (!is_interior(width(img), height(img), x, y, n))
            throw OutOfBounds("pixel is too close to the border for 2n+1 differences");
        GradientSamples s;
        s.gx.resize(2 * n + 1);
        s.gy.resize(2 * n + 1);
        for (int j = -n; j <= n; ++j)
        {
            s.gx(j + n) = static_cast<double>(img(y + j, x + 1) - img(y + j, x - 1));
            s.gy(j + n) = static_cast<double>(img(y + 1, x + j) - img(y - 1, x + j));
        }
        s.omega = omega;
        return s;
    }

    template <typename Scalar>
    GradientSamples gradient_samples(const Image<Scalar> &img, int x, int y, int n)
    {
        return gradient_samples(img, x, y, n, estimate_omega(img));
    }
} // namespace bayesedge
