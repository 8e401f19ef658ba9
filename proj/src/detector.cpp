#include "bayesedge/detector.hpp"

#include "bayesedge/errors.hpp"
#include "bayesedge/parallel.hpp"
#include "bayesedge/quadrature.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <algorithm>
#include <numbers>
#include <ostream>

namespace bayesedge
{
    void validate(const DetectionConfig &cfg)
    {
        if (cfg.beta == 0.0 || !std::isfinite(cfg.beta))
            throw InvalidArgument("beta must be finite and nonzero");
        if (!(cfg.sigma_s > 0.0) || !std::isfinite(cfg.sigma_s))
            throw InvalidArgument("smoothing sigma must be positive");
        if (cfg.n < 1)
            throw InvalidArgument("difference half-width n must be positive");
        if (!cfg.sigma.allFinite() || (cfg.sigma - cfg.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw InvalidArgument("Sigma must be symmetric");
        if (Eigen::LLT<Eigen::Matrix2d>(cfg.sigma).info() != Eigen::Success)
            throw InvalidArgument("Sigma must be positive definite");
        validate(cfg.tail);
        if (cfg.quadrature_nodes < 1 || !(cfg.quadrature_half_width > 0.0))
            throw InvalidArgument("quadrature grid must have >= 1 node per panel and positive width");
    }

    BayesFactorTable::BayesFactorTable(const DetectionConfig &cfg, const Eigen::Matrix2d &omega)
        : prior_(Eigen::VectorXd::Zero(2), cfg.sigma, cfg.beta, cfg.tail)
    {
        const Eigen::LLT<Eigen::Matrix2d> omega_llt(omega);
        if (omega_llt.info() != Eigen::Success)
            throw InvalidArgument("Omega must be positive definite");
        const Eigen::Matrix2d omega_inv = omega_llt.solve(Eigen::Matrix2d::Identity());

        const double w = cfg.quadrature_half_width;
        const double s = std::sqrt(cfg.sigma.diagonal().maxCoeff());
        std::vector<double> cuts{-w, 0.0, w};
        for (double c : {s, 3.0 * s})
            if (c < w)
            {
                cuts.push_back(-c);
                cuts.push_back(c);
            }
        std::sort(cuts.begin(), cuts.end());
        const GaussLegendreRule rule = composite_gauss_legendre(cuts, cfg.quadrature_nodes);
        const double m = 2.0 * cfg.n + 1.0;
        const int q = static_cast<int>(rule.nodes.size());
        offset_.resize(q * q);
        slope_.resize(q * q, 2);
        Eigen::VectorXd theta(2);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
            {
                const int k = i * q + j;
                theta << rule.nodes(i), rule.nodes(j);
                const Eigen::Vector2d scaled = omega_inv * theta;
                offset_(k) = std::log(rule.weights(i) * rule.weights(j)) + prior_.log_density(theta)
                             - 0.5 * m * theta.dot(scaled);
                slope_.row(k) = m * scaled.transpose();
            }
    }

    double BayesFactorTable::log_bf(const Eigen::Vector2d &mean_difference) const
    {
        const Eigen::ArrayXd terms = (slope_ * mean_difference).array() + offset_;
        return log_sum_exp(terms);
    }

    ScalarField bf_map(const GrayImage &img, const DetectionConfig &cfg)
    {
        validate(cfg);
        const int w = width(img), h = height(img);
        if (w < 2 * cfg.n + 1 || h < 2 * cfg.n + 1)
            throw InvalidArgument("image is too small for the difference stencil");
        const Eigen::Matrix2d omega = estimate_omega(img);
        const BayesFactorTable table(cfg, omega);

        ScalarField field(h, w);
        std::vector<double> row_min(static_cast<std::size_t>(h), std::numeric_limits<double>::infinity());
        parallel_for(static_cast<std::size_t>(h), [&](std::size_t yy) {
            const int y = static_cast<int>(yy);
            for (int x = 0; x < w; ++x)
            {
                if (!is_interior(w, h, x, y, cfg.n))
                    continue;
                const double v = table.log_bf(gradient_samples(img, x, y, cfg.n, omega));
                if (!std::isfinite(v))
                    throw QuadratureFailure(fmt::format("non-finite log Bayes factor at pixel ({}, {})", x, y));
                field(y, x) = v;
                row_min[yy] = std::min(row_min[yy], v);
            }
        });

        const double floor_value = *std::min_element(row_min.begin(), row_min.end());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (!is_interior(w, h, x, y, cfg.n))
                    field(y, x) = floor_value;
        return field;
    }

    GradientField weighted_gradient(const GrayImage &img, int n)
    {
        if (n < 1)
            throw InvalidArgument("difference half-width n must be positive");
        // Row 2n of Pascal's triangle, normalized to unit sum.
        std::vector<double> weights(static_cast<std::size_t>(2 * n + 1), 1.0);
        for (int k = 1; k <= 2 * n; ++k)
            weights[static_cast<std::size_t>(k)] = weights[static_cast<std::size_t>(k - 1)] * (2 * n - k + 1) / k;
        const double total = std::ldexp(1.0, 2 * n);
        for (auto &wt : weights)
            wt /= total;

        const int w = width(img), h = height(img);
        GradientField g{ScalarField::Zero(h, w), ScalarField::Zero(h, w), ScalarField::Zero(h, w)};
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
            {
                if (!is_interior(w, h, x, y, n))
                    continue;
                double gx = 0.0, gy = 0.0;
                for (int j = -n; j <= n; ++j)
                {
                    const double wt = weights[static_cast<std::size_t>(j + n)];
                    gx += wt * (img(y + j, x + 1) - img(y + j, x - 1));
                    gy += wt * (img(y + 1, x + j) - img(y - 1, x + j));
                }
                g.gx(y, x) = gx;
                g.gy(y, x) = gy;
                g.magnitude(y, x) = std::sqrt(gx * gx + gy * gy);
            }
        return g;
    }

    ScalarField canny_response(const GrayImage &img, const DetectionConfig &cfg)
    {
        return weighted_gradient(img, cfg.n).magnitude;
    }

    ScalarField non_max_suppress(const ScalarField &field)
    {
        if (!field.allFinite())
            throw InvalidArgument("field must be finite");
        const int w = width(field), h = height(field);
        const double floor_value = field.minCoeff();
        ScalarField out(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
            {
                const double v = field(y, x);
                bool keep = true;
                for (int dy = -1; dy <= 1 && keep; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                    {
                        if ((dx || dy) && in_bounds(field, x + dx, y + dy) && field(y + dy, x + dx) > v)
                        {
                            keep = false;
                            break;
                        }
                    }
                out(y, x) = keep ? v : floor_value;
            }
        return out;
    }

    double kmeans_threshold(std::vector<double> values, std::uint64_t seed)
    {
        if (values.empty())
            throw DegenerateField("field is empty");
        if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
            throw InvalidArgument("field values must be finite");
        constexpr std::size_t subsample_above = 4'000'000, subsample_size = 1'000'000;
        if (values.size() > subsample_above)
        {
            Rng rng = make_rng(seed, 0);
            std::vector<double> picked;
            picked.reserve(subsample_size);
            std::sample(values.begin(), values.end(), std::back_inserter(picked), subsample_size, rng);
            values = std::move(picked);
        }
        std::sort(values.begin(), values.end());
        if (!(values.front() < values.back()))
            throw DegenerateField("all field values are equal");

        // The global 2-means optimum in 1-D is a cut of the sorted values; pick the
        // cut with the largest between-cluster sum of squares.
        const std::size_t count = values.size();
        std::vector<long double> prefix(count + 1, 0.0L);
        for (std::size_t i = 0; i < count; ++i)
            prefix[i + 1] = prefix[i] + values[i];
        const long double total = prefix[count];
        std::size_t split = 1;
        long double best = -1.0L;
        for (std::size_t k = 1; k < count; ++k)
        {
            const long double left = prefix[k], right = total - left;
            const long double score = left * left / static_cast<long double>(k)
                                      + right * right / static_cast<long double>(count - k);
            if (score > best)
            {
                best = score;
                split = k;
            }
        }
        return values[split - 1];
    }

    double kmeans_threshold(const ScalarField &field, std::uint64_t seed)
    {
        return kmeans_threshold(std::vector<double>(field.data(), field.data() + field.size()), seed);
    }

    GrayImage preprocess_bayes(const GrayImage &img, const DetectionConfig &cfg)
    {
        GrayImage smoothed = gaussian_smooth(img, cfg.sigma_s);
        // A flat image has nothing to standardize and no edges to find.
        if (cfg.standardize && std::sqrt(sample_variance(smoothed)) >= 1e-12)
            smoothed = standardize(smoothed);
        return smoothed;
    }

    BayesDetection run_bayes_detector(const GrayImage &img, const DetectionConfig &cfg, std::uint64_t seed)
    {
        validate(cfg);
        BayesDetection out;
        out.log_bf = bf_map(preprocess_bayes(img, cfg), cfg);
        out.suppressed = non_max_suppress(out.log_bf);
        try
        {
            out.edges.threshold = kmeans_threshold(out.suppressed, seed);
        }
        catch (const DegenerateField &)
        {
            out.edges.threshold = out.suppressed.maxCoeff();
        }
        out.edges.mask = (out.suppressed > out.edges.threshold).cast<std::uint8_t>();
        return out;
    }

    EdgeMap detect_bayes(const GrayImage &img, const DetectionConfig &cfg, std::uint64_t seed)
    {
        return run_bayes_detector(img, cfg, seed).edges;
    }

    EdgeMap detect_canny(const GrayImage &img, const DetectionConfig &cfg)
    {
        validate(cfg);
        const GrayImage smoothed = gaussian_smooth(img, cfg.sigma_s);
        const GradientField g = weighted_gradient(smoothed, cfg.n);
        const int w = width(img), h = height(img);
        const ScalarField &mag = g.magnitude;

        EdgeMap edges{Mask::Zero(h, w), 0.0};
        std::vector<double> nonzero;
        for (Eigen::Index i = 0; i < mag.size(); ++i)
            if (mag.data()[i] > 0.0)
                nonzero.push_back(mag.data()[i]);
        if (nonzero.empty())
        {
            edges.threshold = std::numeric_limits<double>::infinity();
            return edges;
        }
        const auto rank = static_cast<std::ptrdiff_t>(0.9 * static_cast<double>(nonzero.size() - 1));
        std::nth_element(nonzero.begin(), nonzero.begin() + rank, nonzero.end());
        const double high = nonzero[static_cast<std::size_t>(rank)];
        const double low = 0.4 * high;
        edges.threshold = high;

        // Gradient-direction suppression: strict against the backward
        // neighbour, non-strict against the forward one, so tied ridges stay one pixel wide.
        Mask survivor = Mask::Zero(h, w);
        for (int y = 1; y + 1 < h; ++y)
            for (int x = 1; x + 1 < w; ++x)
            {
                const double m = mag(y, x);
                if (!(m > 0.0))
                    continue;
                double angle = std::atan2(g.gy(y, x), g.gx(y, x)) * 180.0 / std::numbers::pi;
                if (angle < 0.0)
                    angle += 180.0;
                int dx = 1, dy = 0;
                if (angle >= 22.5 && angle < 67.5)
                    dx = 1, dy = 1;
                else if (angle >= 67.5 && angle < 112.5)
                    dx = 0, dy = 1;
                else if (angle >= 112.5 && angle < 157.5)
                    dx = -1, dy = 1;
                if (m > mag(y - dy, x - dx) && m >= mag(y + dy, x + dx))
                    survivor(y, x) = 1;
            }

        std::vector<Pixel> stack;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (survivor(y, x) && mag(y, x) >= high)
                {
                    edges.mask(y, x) = 1;
                    stack.push_back({x, y});
                }
        while (!stack.empty())
        {
            const Pixel p = stack.back();
            stack.pop_back();
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                {
                    const int x = p.x + dx, y = p.y + dy;
                    if (in_bounds(mag, x, y) && !edges.mask(y, x) && survivor(y, x) && mag(y, x) >= low)
                    {
                        edges.mask(y, x) = 1;
                        stack.push_back({x, y});
                    }
                }
        }
        return edges;
    }

    void write_field_csv(std::ostream &os, const ScalarField &field)
    {
        os << "x,y,log_bf\n";
        for (int y = 0; y < height(field); ++y)
            for (int x = 0; x < width(field); ++x)
                os << fmt::format("{},{},{:.12g}\n", x, y, field(y, x));
    }
} // namespace bayesedge
