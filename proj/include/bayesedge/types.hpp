#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <vector>

namespace bayesedge
{
    // Images are row-major: img(y, x) addresses column x of row y.
    template <typename Scalar>
    using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    using GrayImage = Image<double>;
    using ScalarField = Image<double>;
    using Mask = Image<std::uint8_t>;
    using Labels = Image<int>;

    struct Pixel
    {
        int x = 0;
        int y = 0;

        friend auto operator<=>(const Pixel &, const Pixel &) = default;
    };

    using PixelList = std::vector<Pixel>;

    inline int width(const auto &img) { return static_cast<int>(img.cols()); }
    inline int height(const auto &img) { return static_cast<int>(img.rows()); }

    inline bool in_bounds(const auto &img, int x, int y)
    {
        return x >= 0 && y >= 0 && x < img.cols() && y < img.rows();
    }
} // namespace bayesedge
