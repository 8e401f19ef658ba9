#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <iosfwd>
#include <limits>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace bayesedge
{
    /// Generalized Gaussian kernel exp[-{|theta - theta0| / sigma}^(2 beta)].
    template <typename Scalar = double>
    struct Kernel
    {
        Scalar theta0 = Scalar(0);
        Scalar sigma = Scalar(1);
        Scalar beta = Scalar(1);
    };

    void validate(const Kernel<double> &k);

    // Value at the mode: 1 for beta > 0, and 0 for beta < 0 (limit of the exponent -> +inf).
    template <typename Scalar>
    Scalar kernel_mode_value(const Kernel<Scalar> &k)
    {
        return k.beta > Scalar(0) ? Scalar(1) : Scalar(0);
    }

    template <typename Scalar>
    Scalar kernel_eval(const Kernel<Scalar> &k, Scalar theta)
    {
        using std::abs;
        using std::exp;
        using std::pow;
        const Scalar z = abs(theta - k.theta0) / k.sigma;
        if (z == Scalar(0))
            return kernel_mode_value(k);
        return exp(-pow(z, Scalar(2) * k.beta));
    }

    /// log |phi(theta0) - phi(theta)| written in terms of the kernel exponent
    /// (z^(2 beta) in one dimension, q^beta for a quadratic form q).
    inline double log_reflected_gap(double beta, double exponent)
    {
        if (beta > 0.0)
            return exponent == 0.0 ? -std::numeric_limits<double>::infinity()
                                   : std::log(-std::expm1(-exponent));
        return -exponent;
    }

    // Truncation to the open interval (lower, upper).
    struct Bounds
    {
        double lower = -1.0;
        double upper = 1.0;
    };

    /// Tail weight g(theta) = exp{-(|theta - theta0| / sigma_g)^(2 alpha)}.
    struct TailFunction
    {
        double sigma_g = 1.0;
        double alpha = 1.0;

        double log_weight(double distance) const
        {
            return -std::pow(std::abs(distance) / sigma_g, 2.0 * alpha);
        }
        // Radius beyond which g < 1e-14.
        double negligible_radius() const;
    };

    void validate(const TailFunction &g);

    /// One member of the univariate reflected non-local prior family. The
    /// normalizing constant is computed at construction and never changes.
    class PriorSpec
    {
    public:
        using Support = std::variant<Bounds, TailFunction>;

        PriorSpec(Kernel<double> kernel, Support support);

        static PriorSpec truncated(Kernel<double> kernel, double lower, double upper)
        {
            return PriorSpec(kernel, Bounds{lower, upper});
        }
        static PriorSpec generalized(Kernel<double> kernel, TailFunction tail = {})
        {
            return PriorSpec(kernel, tail);
        }

        const Kernel<double> &kernel() const { return kernel_; }
        const Support &support() const { return support_; }
        bool is_truncated() const { return std::holds_alternative<Bounds>(support_); }

        // Interval that carries all mass the quadrature accounts for.
        std::pair<double, double> integration_bounds() const;

        double tau() const { return tau_; }

        // {phi(theta0) - phi(theta)} * weight(theta), without 1/tau.
        double unnormalized(double theta) const;
        double density(double theta) const;
        double log_density(double theta) const;

    private:
        friend double normalize(const PriorSpec &spec);
        double gap_times_weight(double theta) const;

        Kernel<double> kernel_;
        Support support_;
        double tau_ = 0.0;
        double log_abs_tau_ = 0.0;
    };

    /// Normalizing constant by adaptive Simpson (abs tol 1e-10, 2^20 evaluations).
    /// Negative when beta < 0.
    double normalize(const PriorSpec &spec);

    inline double density(const PriorSpec &spec, double theta) { return spec.density(theta); }

    std::vector<std::pair<double, double>> density_curve(const PriorSpec &spec, std::span<const double> grid);

    // CSV with header `theta,density`, 12 significant digits.
    void write_density_curve_csv(std::ostream &os, std::span<const std::pair<double, double>> curve);

    std::vector<double> linspace(double lo, double hi, std::size_t count);

    /// Multivariate reflected non-local prior with kernel
    /// exp[-{(theta - theta0)^T Sigma^-1 (theta - theta0)}^beta] and radial tail
    /// g(theta) = exp{-(|theta - theta0|^2 / sigma_g^2)^alpha}.
    class MultiPriorSpec
    {
    public:
        MultiPriorSpec(Eigen::VectorXd theta0, Eigen::MatrixXd sigma, double beta, TailFunction tail = {});

        int dim() const { return static_cast<int>(theta0_.size()); }
        const Eigen::VectorXd &theta0() const { return theta0_; }
        const Eigen::MatrixXd &sigma() const { return sigma_; }
        double beta() const { return beta_; }
        const TailFunction &tail() const { return tail_; }
        double tau() const { return tau_; }

        double quadratic_form(const Eigen::Ref<const Eigen::VectorXd> &theta) const;
        double unnormalized(const Eigen::Ref<const Eigen::VectorXd> &theta) const;
        double log_density(const Eigen::Ref<const Eigen::VectorXd> &theta) const;
        double density(const Eigen::Ref<const Eigen::VectorXd> &theta) const;

        // Half-width of the axis-aligned box used for normalization.
        double integration_radius() const { return tail_.negligible_radius(); }

    private:
        void check_dim(const Eigen::Ref<const Eigen::VectorXd> &theta) const;

        Eigen::VectorXd theta0_;
        Eigen::MatrixXd sigma_;
        Eigen::LLT<Eigen::MatrixXd> sigma_llt_;
        double beta_;
        TailFunction tail_;
        double tau_ = 0.0;
        double log_abs_tau_ = 0.0;

        friend double normalize(const MultiPriorSpec &spec);
    };

    /// Tensor-product composite Gauss-Legendre normalization, graded toward theta0.
    double normalize(const MultiPriorSpec &spec);

    double density_multi(const MultiPriorSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &theta);
} // namespace bayesedge
