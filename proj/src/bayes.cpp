#include "bayesedge/bayes.hpp"

#include "bayesedge/errors.hpp"
#include "bayesedge/parallel.hpp"
#include "bayesedge/quadrature.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <numbers>
#include <ostream>

namespace bayesedge
{
    namespace
    {
        // Refined subintervals already sit on the peak, so shallow forced depth suffices.
        SimpsonOptions marginal_options()
        {
            SimpsonOptions opt;
            opt.min_depth = 2;
            return opt;
        }

        std::vector<double> make_cuts(double lo, double centre, double hi, double hint)
        {
            std::vector<double> cuts{lo, centre, hi};
            if (hint > lo && hint < hi)
                cuts.push_back(hint);
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            return cuts;
        }

        double gaussian_log_norm(std::size_t count, double sd)
        {
            return -0.5 * static_cast<double>(count) * std::log(2.0 * std::numbers::pi * sd * sd);
        }
    } // namespace

    void validate(const GaussianSample &sample)
    {
        if (sample.values.empty())
            throw InvalidArgument("sample must contain at least one observation");
        if (!(sample.known_sd > 0.0) || !std::isfinite(sample.known_sd))
            throw InvalidArgument("known standard deviation must be positive");
        for (double v : sample.values)
            if (!std::isfinite(v))
                throw InvalidArgument("sample values must be finite");
    }

    SampleSummary summarize(const GaussianSample &sample)
    {
        validate(sample);
        SampleSummary s;
        s.n = sample.values.size();
        double sum = 0.0;
        for (double v : sample.values)
            sum += v;
        s.mean = sum / static_cast<double>(s.n);
        for (double v : sample.values)
            s.centered_ss += (v - s.mean) * (v - s.mean);
        return s;
    }

    namespace
    {
        double log_likelihood(const SampleSummary &s, double sd, double theta)
        {
            const double dev = s.mean - theta;
            return gaussian_log_norm(s.n, sd) - (s.centered_ss + static_cast<double>(s.n) * dev * dev) / (2.0 * sd * sd);
        }
    } // namespace

    double log_likelihood(const GaussianSample &sample, double theta)
    {
        return log_likelihood(summarize(sample), sample.known_sd, theta);
    }

    double log_marginal(const GaussianSample &sample, const PriorSpec &prior)
    {
        const SampleSummary s = summarize(sample);
        const double sd = sample.known_sd;
        const auto [lo, hi] = prior.integration_bounds();
        const auto cuts = make_cuts(lo, prior.kernel().theta0, hi, s.mean);
        const double scale = sd / std::sqrt(static_cast<double>(s.n));
        // The density vanishes at truncation bounds but not just inside them; use the interior limit.
        const double inner_lo = std::nextafter(lo, hi), inner_hi = std::nextafter(hi, lo);
        const auto log_f = [&](double t) {
            return prior.log_density(std::clamp(t, inner_lo, inner_hi)) + log_likelihood(s, sd, t);
        };
        return log_integrate(log_f, cuts, scale, marginal_options());
    }

    double log_bayes_factor(const GaussianSample &sample, const PriorSpec &alt_prior, double null_theta)
    {
        return log_marginal(sample, alt_prior) - log_likelihood(sample, null_theta);
    }

    namespace
    {
        struct MultiSummary
        {
            std::size_t n = 0;
            Eigen::VectorXd mean;
            double centered_ss = 0.0;
        };

        MultiSummary summarize(const MultiGaussianSample &sample)
        {
            if (sample.values.rows() < 1 || sample.values.cols() < 1)
                throw InvalidArgument("sample must contain at least one observation");
            if (!(sample.known_sd > 0.0))
                throw InvalidArgument("known standard deviation must be positive");
            if (!sample.values.allFinite())
                throw InvalidArgument("sample values must be finite");
            MultiSummary s;
            s.n = static_cast<std::size_t>(sample.values.rows());
            s.mean = sample.values.colwise().mean().transpose();
            s.centered_ss = (sample.values.rowwise() - s.mean.transpose()).squaredNorm();
            return s;
        }

        double log_likelihood(const MultiSummary &s, double sd, const Eigen::Ref<const Eigen::VectorXd> &theta)
        {
            const double dev2 = (s.mean - theta).squaredNorm();
            return gaussian_log_norm(s.n * static_cast<std::size_t>(s.mean.size()), sd)
                   - (s.centered_ss + static_cast<double>(s.n) * dev2) / (2.0 * sd * sd);
        }
    } // namespace

    double log_likelihood(const MultiGaussianSample &sample, const Eigen::Ref<const Eigen::VectorXd> &theta)
    {
        const MultiSummary s = summarize(sample);
        if (theta.size() != s.mean.size())
            throw DimensionMismatch("parameter dimension does not match the sample");
        return log_likelihood(s, sample.known_sd, theta);
    }

    double log_marginal(const MultiGaussianSample &sample, const MultiPriorSpec &prior)
    {
        const MultiSummary s = summarize(sample);
        if (s.mean.size() != prior.dim())
            throw DimensionMismatch("prior dimension does not match the sample");
        const double sd = sample.known_sd;
        const double scale = sd / std::sqrt(static_cast<double>(s.n));
        const double radius = prior.integration_radius();
        const Eigen::VectorXd &c = prior.theta0();

        if (prior.dim() == 1)
        {
            Eigen::VectorXd point(1);
            const auto log_f = [&](double t) {
                point(0) = t;
                return prior.log_density(point) + log_likelihood(s, sd, point);
            };
            const auto cuts = make_cuts(c(0) - radius, c(0), c(0) + radius, s.mean(0));
            return log_integrate(log_f, cuts, scale, marginal_options());
        }
        if (prior.dim() != 2)
            throw InvalidArgument("marginal likelihood is implemented for d = 1 and d = 2");

        // Tensor Gauss-Legendre with panels graded around the sample mean and the
        // mode; nested adaptive rules would feed inner-integral noise to the outer one.
        std::array<GaussLegendreRule, 2> axes;
        for (int k = 0; k < 2; ++k)
        {
            const double lo = c(k) - radius, hi = c(k) + radius;
            std::vector<double> cuts{lo, c(k), hi};
            for (const double centre : {s.mean(k), c(k)})
            {
                if (centre > lo && centre < hi)
                    cuts.push_back(centre);
                for (int j = 0; j <= 8; ++j)
                    for (const double side : {-1.0, 1.0})
                    {
                        const double t = centre + side * scale * std::ldexp(1.0, j);
                        if (t > lo && t < hi)
                            cuts.push_back(t);
                    }
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            axes[k] = composite_gauss_legendre(cuts, 12);
        }
        const auto nx = axes[0].nodes.size(), ny = axes[1].nodes.size();
        Eigen::ArrayXd terms(nx * ny);
        Eigen::VectorXd point(2);
        for (Eigen::Index i = 0; i < nx; ++i)
            for (Eigen::Index j = 0; j < ny; ++j)
            {
                point << axes[0].nodes(i), axes[1].nodes(j);
                terms(i * ny + j) = std::log(axes[0].weights(i) * axes[1].weights(j)) + prior.log_density(point)
                                    + log_likelihood(s, sd, point);
            }
        const double value = log_sum_exp(terms);
        if (!std::isfinite(value))
            throw QuadratureFailure("bivariate marginal likelihood is not finite");
        return value;
    }

    double log_bayes_factor(const MultiGaussianSample &sample, const MultiPriorSpec &alt_prior,
                            const Eigen::Ref<const Eigen::VectorXd> &null_theta)
    {
        return log_marginal(sample, alt_prior) - log_likelihood(sample, null_theta);
    }

    PriorSpec make_study_prior(const StudyPrior &prior, double beta)
    {
        const Kernel<double> k{0.0, prior.sigma, beta};
        if (prior.family == PriorFamily::truncated)
            return PriorSpec::truncated(k, prior.bounds.lower, prior.bounds.upper);
        return PriorSpec::generalized(k, prior.tail);
    }

    std::vector<std::size_t> default_study_sizes()
    {
        std::vector<std::size_t> ns;
        for (double e : linspace(std::log10(50.0), 4.0, 12))
            ns.push_back(static_cast<std::size_t>(std::lround(std::pow(10.0, e))));
        return ns;
    }

    std::vector<double> default_study_means() { return linspace(0.0, 3.0, 13); }

    namespace
    {
        struct Moments
        {
            double mean = 0.0;
            double sd = 0.0;
        };

        Moments moments(std::span<const double> v)
        {
            Moments m;
            for (double x : v)
                m.mean += x;
            m.mean /= static_cast<double>(v.size());
            if (v.size() > 1)
            {
                double ss = 0.0;
                for (double x : v)
                    ss += (x - m.mean) * (x - m.mean);
                m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
            }
            return m;
        }

        // Replicated log BF of the point null 0 for data N(mean, 1) of size n.
        std::vector<double> simulate_log_bf(const PriorSpec &prior, double mean, std::size_t n,
                                            std::size_t replications, Rng rng)
        {
            std::normal_distribution<double> normal(mean, 1.0);
            std::vector<double> out(replications);
            GaussianSample sample;
            sample.values.resize(n);
            for (auto &lbf : out)
            {
                for (auto &v : sample.values)
                    v = normal(rng);
                lbf = log_bayes_factor(sample, prior, 0.0);
            }
            return out;
        }

        std::vector<double> simulate_log_bf(const MultiPriorSpec &prior, std::size_t n, std::size_t replications,
                                            Rng rng)
        {
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<double> out(replications);
            MultiGaussianSample sample;
            sample.values.resize(static_cast<Eigen::Index>(n), prior.dim());
            const Eigen::VectorXd null = Eigen::VectorXd::Zero(prior.dim());
            for (auto &lbf : out)
            {
                for (Eigen::Index i = 0; i < sample.values.size(); ++i)
                    sample.values.data()[i] = normal(rng);
                lbf = log_bayes_factor(sample, prior, null);
            }
            return out;
        }
    } // namespace

    std::vector<EvidenceCell> weight_of_evidence_study(const EvidenceStudyConfig &config)
    {
        if (config.replications < 1)
            throw InvalidArgument("replications must be at least 1");
        if (config.betas.empty() || config.theta0s.empty() || config.ns.empty())
            throw InvalidArgument("study grids must be nonempty");
        for (std::size_t n : config.ns)
            if (n < 1)
                throw InvalidArgument("sample sizes must be positive");

        std::vector<PriorSpec> priors;
        for (double b : config.betas)
            priors.push_back(make_study_prior(config.prior, b));

        const std::size_t nt = config.theta0s.size(), nn = config.ns.size();
        std::vector<EvidenceCell> cells(config.betas.size() * nt * nn);
        parallel_for(cells.size(), [&](std::size_t idx) {
            const std::size_t ib = idx / (nt * nn), it = (idx / nn) % nt, in = idx % nn;
            const auto lbf = simulate_log_bf(priors[ib], config.theta0s[it], config.ns[in], config.replications,
                                             make_rng(config.seed, idx));
            const Moments m = moments(lbf);
            cells[idx] = {config.betas[ib], config.theta0s[it], config.ns[in], m.mean, m.sd, config.replications};
        });
        return cells;
    }

    void write_evidence_csv(std::ostream &os, std::span<const EvidenceCell> cells)
    {
        os << "beta,theta0,n,mean_log_bf,sd_log_bf,replications\n";
        for (const auto &c : cells)
            os << fmt::format("{:.12g},{:.12g},{},{:.12g},{:.12g},{}\n", c.beta, c.theta0, c.n, c.mean_log_bf,
                              c.sd_log_bf, c.replications);
    }

    LinearFit fit_line(std::span<const double> x, std::span<const double> y)
    {
        if (x.size() != y.size() || x.size() < 2)
            throw InvalidArgument("line fit needs two equally sized arrays of length >= 2");
        const auto m = static_cast<Eigen::Index>(x.size());
        Eigen::MatrixXd design(m, 2);
        Eigen::VectorXd rhs(m);
        for (Eigen::Index i = 0; i < m; ++i)
        {
            design(i, 0) = 1.0;
            design(i, 1) = x[static_cast<std::size_t>(i)];
            rhs(i) = y[static_cast<std::size_t>(i)];
        }
        const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
        const double ss_res = (rhs - design * coef).squaredNorm();
        const double ss_tot = (rhs.array() - rhs.mean()).square().sum();
        LinearFit fit;
        fit.intercept = coef(0);
        fit.slope = coef(1);
        fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
        return fit;
    }

    RateStudyResult verify_rates(const RateStudyConfig &config)
    {
        if (config.beta == 0.0 || !std::isfinite(config.beta))
            throw InvalidArgument("beta must be finite and nonzero");
        if (config.d != 1 && config.d != 2)
            throw InvalidArgument("rate study supports d = 1 and d = 2");
        if (config.n_grid.size() < 4)
            throw InsufficientGrid("rate study needs at least 4 sample sizes");
        for (std::size_t i = 0; i < config.n_grid.size(); ++i)
            if (config.n_grid[i] < 1 || (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]))
                throw InvalidArgument("sample-size grid must be positive and strictly increasing");
        if (config.replications < 1)
            throw InvalidArgument("replications must be at least 1");

        RateStudyResult result;
        result.beta = config.beta;
        result.d = config.d;
        result.sample_sizes = config.n_grid;
        result.mean_log_bf.resize(config.n_grid.size());

        if (config.d == 1)
        {
            const PriorSpec prior = make_study_prior(config.prior, config.beta);
            parallel_for(config.n_grid.size(), [&](std::size_t i) {
                const auto lbf = simulate_log_bf(prior, 0.0, config.n_grid[i], config.replications,
                                                 make_rng(config.seed, i));
                result.mean_log_bf[i] = moments(lbf).mean;
            });
        }
        else
        {
            const double s2 = config.prior.sigma * config.prior.sigma;
            const MultiPriorSpec prior(Eigen::VectorXd::Zero(2), s2 * Eigen::MatrixXd::Identity(2, 2), config.beta,
                                       config.prior.tail);
            parallel_for(config.n_grid.size(), [&](std::size_t i) {
                const auto lbf = simulate_log_bf(prior, config.n_grid[i], config.replications,
                                                 make_rng(config.seed, i));
                result.mean_log_bf[i] = moments(lbf).mean;
            });
        }

        for (std::size_t n : config.n_grid)
        {
            const double nd = static_cast<double>(n);
            result.regressor.push_back(config.beta > 0.0 ? std::log(nd)
                                                         : std::pow(nd, -config.beta / (1.0 - config.beta)));
        }
        const LinearFit fit = fit_line(result.regressor, result.mean_log_bf);
        result.fitted_slope = fit.slope;
        result.intercept = fit.intercept;
        result.fit_r2 = fit.r2;
        result.expected_slope = config.beta > 0.0 ? -(config.d / 2.0 + config.beta)
                                                  : std::numeric_limits<double>::quiet_NaN();
        return result;
    }

    void write_rates_csv(std::ostream &os, std::span<const RateStudyResult> results)
    {
        os << "beta,d,fitted_slope,intercept,fit_r2,expected_slope,regressor\n";
        for (const auto &r : results)
        {
            const char *regressor = r.beta > 0.0 ? "log_n" : "n_pow";
            os << fmt::format("{:.12g},{},{:.12g},{:.12g},{:.12g},{},{}\n", r.beta, r.d, r.fitted_slope,
                              r.intercept, r.fit_r2,
                              std::isnan(r.expected_slope) ? std::string("negative")
                                                           : fmt::format("{:.12g}", r.expected_slope),
                              regressor);
        }
    }
} // namespace bayesedge
