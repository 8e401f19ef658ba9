#pragma once

// Brute-force reference implementations. Deliberately slow and written
// without the library's quadrature, prior, or geometry code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle
{
    // Reflected kernel gap times tail weight, straight from the formula.
    inline double reflected(double z, double beta)
    {
        if (z == 0.0)
            return 0.0;
        const double phi = std::exp(-std::pow(z, 2.0 * beta));
        return beta > 0.0 ? 1.0 - phi : -phi;
    }

    template <typename F>
    double trapezoid(F &&f, double lo, double hi, std::size_t nodes)
    {
        const double h = (hi - lo) / static_cast<double>(nodes - 1);
        long double sum = 0.5L * (f(lo) + f(hi));
        for (std::size_t i = 1; i + 1 < nodes; ++i)
            sum += f(lo + h * static_cast<double>(i));
        return static_cast<double>(sum * h);
    }

    // log of the trapezoid integral of exp(h) without overflow.
    template <typename H>
    double log_trapezoid(H &&h, double lo, double hi, std::size_t nodes)
    {
        const double step = (hi - lo) / static_cast<double>(nodes - 1);
        std::vector<double> v(nodes);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes; ++i)
        {
            v[i] = h(lo + step * static_cast<double>(i));
            peak = std::max(peak, v[i]);
        }
        long double sum = 0.0L;
        for (std::size_t i = 0; i < nodes; ++i)
            sum += (i == 0 || i + 1 == nodes ? 0.5L : 1.0L) * std::exp(static_cast<long double>(v[i] - peak));
        return peak + std::log(static_cast<double>(sum * step));
    }

    struct Prior1d
    {
        double theta0, sigma, beta;
        bool truncated;
        double lower, upper;       // truncated support
        double sigma_g, alpha;     // tail for the generalized variant
        double lo, hi;             // integration range
        double tau;

        double raw(double theta) const
        {
            const double z = std::abs(theta - theta0) / sigma;
            double v = reflected(z, beta);
            if (!truncated)
                v *= std::exp(-std::pow(std::abs(theta - theta0) / sigma_g, 2.0 * alpha));
            return v;
        }
    };

    inline Prior1d truncated_prior(double theta0, double sigma, double beta, double lower, double upper,
                                   std::size_t nodes = 1'000'001)
    {
        Prior1d p{theta0, sigma, beta, true, lower, upper, 1.0, 1.0, lower, upper, 0.0};
        p.tau = trapezoid([&](double t) { return p.raw(t); }, lower, upper, nodes);
        return p;
    }

    inline Prior1d generalized_prior(double theta0, double sigma, double beta, double sigma_g, double alpha,
                                     std::size_t nodes = 1'000'001)
    {
        const double r = 12.0 * std::max(sigma, sigma_g);
        Prior1d p{theta0, sigma, beta, false, 0, 0, sigma_g, alpha, theta0 - r, theta0 + r, 0.0};
        p.tau = trapezoid([&](double t) { return p.raw(t); }, p.lo, p.hi, nodes);
        return p;
    }

    inline double log_normal_likelihood(const std::vector<double> &x, double sd, double theta)
    {
        double s = 0.0;
        for (double v : x)
            s += (v - theta) * (v - theta);
        return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi * sd * sd) - s / (2.0 * sd * sd);
    }

    // log marginal likelihood on a uniform grid of `nodes` points.
    inline double log_marginal(const std::vector<double> &x, double sd, const Prior1d &p, std::size_t nodes = 1'000'001)
    {
        return log_trapezoid(
            [&](double t) {
                const double d = p.raw(t) / p.tau;
                return d > 0.0 ? std::log(d) + log_normal_likelihood(x, sd, t) : -std::numeric_limits<double>::infinity();
            },
            p.lo, p.hi, nodes);
    }

    // Per-pixel log BF with Omega = omega_scale * I, generalized 2-D prior
    // (Sigma = sigma2 * I, radial tail exp(-(r^2/sigma_g^2)^alpha)), midpoint rule.
    struct Grid2d
    {
        std::vector<double> theta;   // cell centres along one axis
        std::vector<double> log_w;   // log prior mass of each cell, row-major
    };

    inline Grid2d prior_grid(double beta, double sigma2, double sigma_g, double alpha, double half_width, int cells)
    {
        Grid2d g;
        const double h = 2.0 * half_width / cells;
        g.theta.resize(static_cast<std::size_t>(cells));
        for (int i = 0; i < cells; ++i)
            g.theta[static_cast<std::size_t>(i)] = -half_width + h * (i + 0.5);
        std::vector<double> raw(static_cast<std::size_t>(cells) * cells);
        long double tau = 0.0L;
        for (int i = 0; i < cells; ++i)
            for (int j = 0; j < cells; ++j)
            {
                const double a = g.theta[static_cast<std::size_t>(i)], b = g.theta[static_cast<std::size_t>(j)];
                const double r2 = a * a + b * b;
                const double q = r2 / sigma2;
                const double phi = std::exp(-std::pow(q, beta));
                const double gap = beta > 0.0 ? 1.0 - phi : -phi;
                const double v = gap * std::exp(-std::pow(r2 / (sigma_g * sigma_g), alpha));
                raw[static_cast<std::size_t>(i) * cells + j] = v;
                tau += v * h * h;
            }
        g.log_w.resize(raw.size());
        for (std::size_t k = 0; k < raw.size(); ++k)
            g.log_w[k] = std::log(raw[k] * h * h / static_cast<double>(tau));
        return g;
    }

    // gx, gy: the 2n+1 differences; omega_scale: diagonal of Omega.
    inline double log_bf(const Grid2d &g, const std::vector<double> &gx, const std::vector<double> &gy, double omega_scale)
    {
        const std::size_t cells = g.theta.size();
        auto loglik = [&](double a, double b) {
            double s = 0.0;
            for (std::size_t j = 0; j < gx.size(); ++j)
                s += ((gx[j] - a) * (gx[j] - a) + (gy[j] - b) * (gy[j] - b)) / omega_scale;
            return -0.5 * s;
        };
        const double null = loglik(0.0, 0.0);
        std::vector<double> terms(cells * cells);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cells; ++i)
            for (std::size_t j = 0; j < cells; ++j)
            {
                const double v = g.log_w[i * cells + j] + loglik(g.theta[i], g.theta[j]) - null;
                terms[i * cells + j] = v;
                peak = std::max(peak, v);
            }
        long double sum = 0.0L;
        for (double v : terms)
            sum += std::exp(static_cast<long double>(v - peak));
        return peak + std::log(static_cast<double>(sum));
    }

    // Best single split of `values` into two clusters by scanning every cut; returns
    // the largest member of the lower cluster.
    inline double best_split_threshold(std::vector<double> values)
    {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        double best_cost = std::numeric_limits<double>::infinity();
        std::size_t best = 1;
        for (std::size_t k = 1; k < n; ++k)
        {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t i = 0; i < k; ++i)
                m1 += values[i];
            for (std::size_t i = k; i < n; ++i)
                m2 += values[i];
            m1 /= static_cast<double>(k);
            m2 /= static_cast<double>(n - k);
            double cost = 0.0;
            for (std::size_t i = 0; i < k; ++i)
                cost += (values[i] - m1) * (values[i] - m1);
            for (std::size_t i = k; i < n; ++i)
                cost += (values[i] - m2) * (values[i] - m2);
            if (cost < best_cost)
            {
                best_cost = cost;
                best = k;
            }
        }
        return values[best - 1];
    }

    struct Pt
    {
        long long x, y;
        bool operator==(const Pt &) const = default;
        bool operator<(const Pt &o) const { return x != o.x ? x < o.x : y < o.y; }
    };

    inline long long orient(Pt a, Pt b, Pt c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

    // Hull vertices as a sorted set: a point is a vertex iff some pair (p, q) with p
    // in it has every other point on the left of or on p->q, and p is not strictly
    // between two other points on that supporting line.
    inline std::vector<Pt> hull_vertices(std::vector<Pt> pts)
    {
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        if (pts.size() <= 2)
            return pts;
        std::vector<Pt> out;
        for (const Pt &p : pts)
        {
            bool vertex = false;
            for (const Pt &q : pts)
            {
                if (q == p || vertex)
                    continue;
                bool supporting = true;
                for (const Pt &r : pts)
                    if (orient(p, q, r) < 0)
                    {
                        supporting = false;
                        break;
                    }
                if (!supporting)
                    continue;
                // p must be an extreme point of the points on this supporting line.
                bool between = false;
                for (const Pt &a : pts)
                    for (const Pt &b : pts)
                    {
                        if (a == p || b == p || orient(a, b, p) != 0 || orient(p, q, a) != 0 || orient(p, q, b) != 0)
                            continue;
                        const long long dot = (a.x - p.x) * (b.x - p.x) + (a.y - p.y) * (b.y - p.y);
                        if (dot < 0)
                            between = true;
                    }
                vertex = !between;
            }
            if (vertex)
                out.push_back(p);
        }
        return out;
    }

    inline std::pair<double, double> metrics(const std::vector<std::pair<int, int>> &s,
                                             const std::vector<std::pair<int, int>> &t, double kappa)
    {
        auto near = [&](std::pair<int, int> p, const std::vector<std::pair<int, int>> &set) {
            for (const auto &q : set)
            {
                const double dx = p.first - q.first, dy = p.second - q.second;
                if (std::sqrt(dx * dx + dy * dy) <= kappa * (1.0 + 1e-13))
                    return true;
            }
            return false;
        };
        if (s.empty())
            return {1.0, 0.0};
        std::size_t hs = 0, ht = 0;
        for (const auto &p : s)
            hs += near(p, t);
        for (const auto &p : t)
            ht += near(p, s);
        return {static_cast<double>(hs) / static_cast<double>(s.size()), static_cast<double>(ht) / static_cast<double>(t.size())};
    }
} // namespace oracle
