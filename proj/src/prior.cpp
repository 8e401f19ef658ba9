#include "bayesedge/prior.hpp"

#include "bayesedge/errors.hpp"
#include "bayesedge/quadrature.hpp"

#include <fmt/format.h>

#include <ostream>

namespace bayesedge
{
    void validate(const Kernel<double> &k)
    {
        if (!std::isfinite(k.theta0))
            throw InvalidArgument("kernel location must be finite");
        if (!(k.sigma > 0.0) || !std::isfinite(k.sigma))
            throw InvalidArgument("kernel scale sigma must be positive");
        if (k.beta == 0.0 || !std::isfinite(k.beta))
            throw InvalidArgument("kernel shape beta must be finite and nonzero");
    }

    void validate(const TailFunction &g)
    {
        if (!(g.sigma_g > 0.0) || !std::isfinite(g.sigma_g))
            throw InvalidArgument("tail scale sigma_g must be positive");
        if (!(g.alpha > 0.0) || !std::isfinite(g.alpha))
            throw InvalidArgument("tail exponent alpha must be positive");
    }

    double TailFunction::negligible_radius() const
    {
        return sigma_g * std::pow(14.0 * std::log(10.0), 1.0 / (2.0 * alpha));
    }

    PriorSpec::PriorSpec(Kernel<double> kernel, Support support) : kernel_(kernel), support_(support)
    {
        validate(kernel_);
        if (const auto *b = std::get_if<Bounds>(&support_))
        {
            if (!(b->lower < kernel_.theta0 && kernel_.theta0 < b->upper))
                throw InvalidArgument("truncation bounds must satisfy a < theta0 < b");
            if (!std::isfinite(b->lower) || !std::isfinite(b->upper))
                throw InvalidArgument("truncation bounds must be finite");
        }
        else
        {
            validate(std::get<TailFunction>(support_));
        }
        tau_ = normalize(*this);
        log_abs_tau_ = std::log(std::abs(tau_));
    }

    std::pair<double, double> PriorSpec::integration_bounds() const
    {
        if (const auto *b = std::get_if<Bounds>(&support_))
            return {b->lower, b->upper};
        const auto &g = std::get<TailFunction>(support_);
        const double half = 12.0 * std::max(kernel_.sigma, g.sigma_g);
        return {kernel_.theta0 - half, kernel_.theta0 + half};
    }

    double PriorSpec::gap_times_weight(double theta) const
    {
        // expm1 keeps 1 - exp(-z^(2 beta)) accurate close to the mode.
        const double z = std::abs(theta - kernel_.theta0) / kernel_.sigma;
        const double exponent = std::pow(z, 2.0 * kernel_.beta);
        const double gap = kernel_.beta > 0.0 ? -std::expm1(-exponent) : (z == 0.0 ? 0.0 : -std::exp(-exponent));
        if (const auto *g = std::get_if<TailFunction>(&support_))
            return gap * std::exp(g->log_weight(theta - kernel_.theta0));
        return gap;
    }

    double PriorSpec::unnormalized(double theta) const
    {
        if (const auto *b = std::get_if<Bounds>(&support_))
        {
            if (!(theta > b->lower && theta < b->upper))
                return 0.0;
        }
        return gap_times_weight(theta);
    }

    double PriorSpec::density(double theta) const
    {
        if (theta == kernel_.theta0)
            return 0.0;
        return unnormalized(theta) / tau_;
    }

    double PriorSpec::log_density(double theta) const
    {
        constexpr double neg_inf = -std::numeric_limits<double>::infinity();
        double log_weight = 0.0;
        if (const auto *b = std::get_if<Bounds>(&support_))
        {
            if (!(theta > b->lower && theta < b->upper))
                return neg_inf;
        }
        else
        {
            log_weight = std::get<TailFunction>(support_).log_weight(theta - kernel_.theta0);
        }
        const double z = std::abs(theta - kernel_.theta0) / kernel_.sigma;
        const double exponent = std::pow(z, 2.0 * kernel_.beta);
        return log_reflected_gap(kernel_.beta, exponent) + log_weight - log_abs_tau_;
    }

    double normalize(const PriorSpec &spec)
    {
        const auto [lo, hi] = spec.integration_bounds();
        const double mode = spec.kernel().theta0;
        const SimpsonOptions opt;
        EvaluationBudget budget(opt.max_evaluations);
        // The indicator is dropped inside the support so the integrand has no
        // jump at the endpoints; split at the mode where |z|^(2 beta) may kink.
        const auto integrand = [&](double t) { return spec.gap_times_weight(t); };
        // Tolerance follows the integrand's magnitude, so tiny supports keep full relative accuracy.
        double peak = 0.0;
        for (int k = 0; k <= 256; ++k)
            peak = std::max(peak, std::abs(integrand(lo + (hi - lo) * k / 256.0)));
        if (peak == 0.0)
            peak = 1.0;
        const double tol = 0.5 * opt.abs_tol * peak * std::min(1.0, hi - lo);
        const double tau = adaptive_simpson(integrand, lo, mode, tol, budget, opt.min_depth, opt.max_depth)
                           + adaptive_simpson(integrand, mode, hi, tol, budget, opt.min_depth, opt.max_depth);
        if (tau == 0.0 || !std::isfinite(tau))
            throw QuadratureFailure("prior normalizing constant is zero or non-finite");
        return tau;
    }

    std::vector<std::pair<double, double>> density_curve(const PriorSpec &spec, std::span<const double> grid)
    {
        std::vector<std::pair<double, double>> curve;
        curve.reserve(grid.size());
        for (double t : grid)
            curve.emplace_back(t, spec.density(t));
        return curve;
    }

    void write_density_curve_csv(std::ostream &os, std::span<const std::pair<double, double>> curve)
    {
        os << "theta,density\n";
        for (const auto &[t, d] : curve)
            os << fmt::format("{:.12g},{:.12g}\n", t, d);
    }

    std::vector<double> linspace(double lo, double hi, std::size_t count)
    {
        std::vector<double> out(count);
        if (count == 1)
        {
            out[0] = lo;
            return out;
        }
        for (std::size_t i = 0; i < count; ++i)
            out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        return out;
    }

    MultiPriorSpec::MultiPriorSpec(Eigen::VectorXd theta0, Eigen::MatrixXd sigma, double beta, TailFunction tail)
        : theta0_(std::move(theta0)), sigma_(std::move(sigma)), beta_(beta), tail_(tail)
    {
        const auto d = theta0_.size();
        if (d < 1 || d > 3)
            throw InvalidArgument("multivariate prior supports dimensions 1 to 3");
        if (sigma_.rows() != d || sigma_.cols() != d)
            throw DimensionMismatch("Sigma must be d x d");
        if (!theta0_.allFinite() || !sigma_.allFinite())
            throw InvalidArgument("prior parameters must be finite");
        if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma_.cwiseAbs().maxCoeff()))
            throw InvalidArgument("Sigma must be symmetric");
        sigma_llt_.compute(sigma_);
        if (sigma_llt_.info() != Eigen::Success)
            throw InvalidArgument("Sigma must be positive definite");
        if (beta_ == 0.0 || !std::isfinite(beta_))
            throw InvalidArgument("kernel shape beta must be finite and nonzero");
        validate(tail_);
        tau_ = normalize(*this);
        log_abs_tau_ = std::log(std::abs(tau_));
    }

    void MultiPriorSpec::check_dim(const Eigen::Ref<const Eigen::VectorXd> &theta) const
    {
        if (theta.size() != theta0_.size())
            throw DimensionMismatch(fmt::format("expected a {}-dimensional point, got {}", theta0_.size(),
                                                theta.size()));
    }

    double MultiPriorSpec::quadratic_form(const Eigen::Ref<const Eigen::VectorXd> &theta) const
    {
        check_dim(theta);
        const Eigen::VectorXd v = sigma_llt_.matrixL().solve(theta - theta0_);
        return v.squaredNorm();
    }

    double MultiPriorSpec::unnormalized(const Eigen::Ref<const Eigen::VectorXd> &theta) const
    {
        const double q = quadratic_form(theta);
        const double exponent = std::pow(q, beta_);
        const double gap = beta_ > 0.0 ? -std::expm1(-exponent) : (q == 0.0 ? 0.0 : -std::exp(-exponent));
        const double r2 = (theta - theta0_).squaredNorm();
        const double g = std::exp(-std::pow(r2 / (tail_.sigma_g * tail_.sigma_g), tail_.alpha));
        return gap * g;
    }

    double MultiPriorSpec::log_density(const Eigen::Ref<const Eigen::VectorXd> &theta) const
    {
        const double q = quadratic_form(theta);
        const double r2 = (theta - theta0_).squaredNorm();
        const double log_g = -std::pow(r2 / (tail_.sigma_g * tail_.sigma_g), tail_.alpha);
        return log_reflected_gap(beta_, std::pow(q, beta_)) + log_g - log_abs_tau_;
    }

    double MultiPriorSpec::density(const Eigen::Ref<const Eigen::VectorXd> &theta) const
    {
        check_dim(theta);
        if ((theta - theta0_).isZero(0.0))
            return 0.0;
        return unnormalized(theta) / tau_;
    }

    double normalize(const MultiPriorSpec &spec)
    {
        const int d = spec.dim();
        const double radius = spec.integration_radius();
        // Panels shrink geometrically toward theta0, where the kernel has its hole.
        constexpr int levels = 7, per_panel = 12;
        std::vector<GaussLegendreRule> axes;
        for (int k = 0; k < d; ++k)
        {
            const double c = spec.theta0()(k);
            std::vector<double> cuts{c};
            for (int level = 0; level < levels; ++level)
            {
                const double offset = std::ldexp(radius, -level);
                cuts.push_back(c - offset);
                cuts.push_back(c + offset);
            }
            std::sort(cuts.begin(), cuts.end());
            axes.push_back(composite_gauss_legendre(cuts, per_panel));
        }
        const int count = static_cast<int>(axes.front().nodes.size());

        Eigen::VectorXd point(d);
        double tau = 0.0;
        std::vector<int> index(d, 0);
        while (true)
        {
            double w = 1.0;
            for (int k = 0; k < d; ++k)
            {
                point(k) = axes[k].nodes(index[k]);
                w *= axes[k].weights(index[k]);
            }
            tau += w * spec.unnormalized(point);

            int k = 0;
            while (k < d && ++index[k] == count)
                index[k++] = 0;
            if (k == d)
                break;
        }
        if (tau == 0.0 || !std::isfinite(tau))
            throw QuadratureFailure("multivariate normalizing constant is zero or non-finite");
        return tau;
    }

    double density_multi(const MultiPriorSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &theta)
    {
        return spec.density(theta);
    }
} // namespace bayesedge
