#pragma once

#include "errors.hpp"

#include <Eigen/Core>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace bayesedge
{
    struct GaussLegendreRule
    {
        Eigen::VectorXd nodes;
        Eigen::VectorXd weights;
    };

    /// Gauss-Legendre rule with `count` nodes mapped onto [lo, hi].
    GaussLegendreRule gauss_legendre(int count, double lo = -1.0, double hi = 1.0);

    // Concatenated rules, `per_panel` nodes between each pair of increasing breakpoints.
    GaussLegendreRule composite_gauss_legendre(std::span<const double> breakpoints, int per_panel);

    struct SimpsonOptions
    {
        double abs_tol = 1e-10;
        std::size_t max_evaluations = std::size_t{1} << 20;
        int min_depth = 4;
        int max_depth = 50;
    };

    // Shared evaluation counter; one budget may span several integrals.
    class EvaluationBudget
    {
    public:
        explicit EvaluationBudget(std::size_t limit) : limit_(limit) {}

        void charge(std::size_t count)
        {
            used_ += count;
            if (used_ > limit_)
                throw QuadratureFailure("adaptive quadrature exceeded its evaluation budget");
        }

        std::size_t used() const { return used_; }

    private:
        std::size_t limit_;
        std::size_t used_ = 0;
    };

    template <typename F>
    double adaptive_simpson(F &&f, double lo, double hi, double abs_tol, EvaluationBudget &budget,
                            int min_depth = 4, int max_depth = 50)
    {
        if (lo == hi)
            return 0.0;

        struct Segment
        {
            double a, b, fa, fm, fb, whole, tol;
            int depth;
        };

        const auto simpson = [](double a, double b, double fa, double fm, double fb) {
            return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        };

        const double mid = 0.5 * (lo + hi);
        const double flo = f(lo), fmid = f(mid), fhi = f(hi);
        budget.charge(3);

        std::vector<Segment> stack;
        stack.push_back({lo, hi, flo, fmid, fhi, simpson(lo, hi, flo, fmid, fhi), abs_tol, 0});

        double total = 0.0;
        double carry = 0.0; // Kahan compensation
        while (!stack.empty())
        {
            const Segment s = stack.back();
            stack.pop_back();

            const double m = 0.5 * (s.a + s.b);
            const double lm = 0.5 * (s.a + m);
            const double rm = 0.5 * (m + s.b);
            const double flm = f(lm), frm = f(rm);
            budget.charge(2);

            const double left = simpson(s.a, m, s.fa, flm, s.fm);
            const double right = simpson(m, s.b, s.fm, frm, s.fb);
            const double delta = left + right - s.whole;

            const bool converged = std::abs(delta) <= 15.0 * s.tol
                                   || std::abs(delta) <= 1e-15 * std::abs(left + right);
            if (s.depth >= min_depth && converged)
            {
                const double y = left + right + delta / 15.0 - carry;
                const double t = total + y;
                carry = (t - total) - y;
                total = t;
                continue;
            }
            if (s.depth >= max_depth)
                throw QuadratureFailure("adaptive quadrature reached maximum subdivision depth");
            if (!std::isfinite(delta))
                throw QuadratureFailure("non-finite integrand value in adaptive quadrature");

            stack.push_back({s.a, m, s.fa, flm, s.fm, left, 0.5 * s.tol, s.depth + 1});
            stack.push_back({m, s.b, s.fm, frm, s.fb, right, 0.5 * s.tol, s.depth + 1});
        }
        return total;
    }

    template <typename F>
    double adaptive_simpson(F &&f, double lo, double hi, const SimpsonOptions &opt = {})
    {
        EvaluationBudget budget(opt.max_evaluations);
        return adaptive_simpson(f, lo, hi, opt.abs_tol, budget, opt.min_depth, opt.max_depth);
    }

    template <typename Derived>
    double log_sum_exp(const Eigen::ArrayBase<Derived> &values)
    {
        const double peak = values.maxCoeff();
        if (!std::isfinite(peak))
            return peak;
        return peak + std::log((values - peak).exp().sum());
    }

    /// log of the integral of exp(log_f) over [cuts.front(), cuts.back()].
    ///
    /// `log_f` must be unimodal between consecutive cuts. Each piece is searched
    /// for its peak, the integrand is rescaled by the global peak, and extra
    /// breakpoints are placed at `scale`-multiples around every peak before
    /// adaptive Simpson runs on the rescaled integrand. `abs_tol` is relative
    /// to the peak height and, on supports shorter than one, to their length.
    template <typename LogF>
    double log_integrate(LogF &&log_f, std::span<const double> cuts, double scale,
                         const SimpsonOptions &opt = {})
    {
        if (cuts.size() < 2 || !(cuts.back() > cuts.front()))
            throw InvalidArgument("log_integrate needs an increasing list of at least two cuts");
        if (!(scale > 0.0))
            throw InvalidArgument("log_integrate needs a positive peak scale");

        constexpr double floor_value = -1e300;
        const auto negated = [&](double t) {
            const double v = log_f(t);
            return std::isnan(v) ? -floor_value : -std::max(v, floor_value);
        };

        double peak = -std::numeric_limits<double>::infinity();
        std::vector<double> refined(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        {
            const double a = cuts[i], b = cuts[i + 1];
            if (!(b > a))
                continue;
            std::uintmax_t iterations = 200;
            const auto [arg, neg] = boost::math::tools::brent_find_minima(negated, a, b, 45, iterations);
            peak = std::max({peak, -neg, log_f(a), log_f(b)});
            refined.push_back(arg);
            for (int k = 0; k <= 6; ++k)
            {
                const double offset = scale * std::ldexp(1.0, k);
                if (arg - offset > a)
                    refined.push_back(arg - offset);
                if (arg + offset < b)
                    refined.push_back(arg + offset);
            }
        }
        if (!(peak > floor_value))
            return -std::numeric_limits<double>::infinity();

        std::sort(refined.begin(), refined.end());
        refined.erase(std::unique(refined.begin(), refined.end()), refined.end());

        const auto scaled = [&](double t) {
            const double v = log_f(t) - peak;
            return std::isnan(v) ? 0.0 : std::exp(v);
        };

        EvaluationBudget budget(opt.max_evaluations);
        // Narrow supports get a proportionally tighter budget so the error stays relative.
        const double span_total = std::max(refined.back() - refined.front(), 1.0);
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < refined.size(); ++i)
        {
            const double a = refined[i], b = refined[i + 1];
            const double tol = opt.abs_tol * (b - a) / span_total;
            sum += adaptive_simpson(scaled, a, b, tol, budget, opt.min_depth, opt.max_depth);
        }
        if (!(sum > 0.0) || !std::isfinite(sum))
            throw QuadratureFailure("log-space quadrature produced a non-positive integral");
        return peak + std::log(sum);
    }
} // namespace bayesedge
