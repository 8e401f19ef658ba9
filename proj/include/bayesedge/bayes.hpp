#pragma once

#include "prior.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace bayesedge
{
    /// Observations X_1..X_n, i.i.d. N(theta, known_sd^2).
    struct GaussianSample
    {
        std::vector<double> values;
        double known_sd = 1.0;
    };

    void validate(const GaussianSample &sample);

    struct SampleSummary
    {
        std::size_t n = 0;
        double mean = 0.0;
        double centered_ss = 0.0;
    };

    SampleSummary summarize(const GaussianSample &sample);

    double log_likelihood(const GaussianSample &sample, double theta);

    /// log of the marginal density under `prior`, by peak-rescaled adaptive quadrature.
    double log_marginal(const GaussianSample &sample, const PriorSpec &prior);

    /// log BF of the alternative prior against the point null at `null_theta`.
    double log_bayes_factor(const GaussianSample &sample, const PriorSpec &alt_prior, double null_theta);

    // Rows are i.i.d. N(theta, known_sd^2 I) observations.
    struct MultiGaussianSample
    {
        Eigen::MatrixXd values;
        double known_sd = 1.0;
    };

    double log_likelihood(const MultiGaussianSample &sample, const Eigen::Ref<const Eigen::VectorXd> &theta);
    // Supports d = 1 (adaptive) and d = 2 (graded tensor Gauss-Legendre).
    double log_marginal(const MultiGaussianSample &sample, const MultiPriorSpec &prior);
    double log_bayes_factor(const MultiGaussianSample &sample, const MultiPriorSpec &alt_prior,
                            const Eigen::Ref<const Eigen::VectorXd> &null_theta);

    enum class PriorFamily
    {
        truncated,
        generalized
    };

    // Alternative prior used by the simulation studies, always centred at the null 0.
    struct StudyPrior
    {
        PriorFamily family = PriorFamily::truncated;
        double sigma = 1.0;
        Bounds bounds{-1.0, 1.0};
        TailFunction tail{};
    };

    PriorSpec make_study_prior(const StudyPrior &prior, double beta);

    struct EvidenceCell
    {
        double beta = 0.0;
        double theta0 = 0.0;
        std::size_t n = 0;
        double mean_log_bf = 0.0;
        double sd_log_bf = 0.0;
        std::size_t replications = 0;
    };

    struct EvidenceStudyConfig
    {
        std::vector<double> betas{-2.0, -1.0, 1.0, 2.0};
        std::vector<double> theta0s;
        std::vector<std::size_t> ns;
        std::size_t replications = 1000;
        std::uint64_t seed = 0;
        StudyPrior prior{};
    };

    // n log-spaced over [50, 10000] and theta0 over [0, 3] in steps of 0.25.
    std::vector<std::size_t> default_study_sizes();
    std::vector<double> default_study_means();

    /// Monte-Carlo mean of log BF for data N(theta0, 1) in every (beta, theta0, n) cell.
    std::vector<EvidenceCell> weight_of_evidence_study(const EvidenceStudyConfig &config);

    // CSV `beta,theta0,n,mean_log_bf,sd_log_bf,replications`.
    void write_evidence_csv(std::ostream &os, std::span<const EvidenceCell> cells);

    struct LinearFit
    {
        double slope = 0.0;
        double intercept = 0.0;
        double r2 = 0.0;
    };

    LinearFit fit_line(std::span<const double> x, std::span<const double> y);

    struct RateStudyConfig
    {
        double beta = 1.0;
        int d = 1;
        std::vector<std::size_t> n_grid{100, 316, 1000, 3162, 10000};
        std::size_t replications = 500;
        std::uint64_t seed = 0;
        StudyPrior prior{};
    };

    struct RateStudyResult
    {
        double beta = 0.0;
        int d = 1;
        std::vector<std::size_t> sample_sizes;
        std::vector<double> mean_log_bf;
        std::vector<double> regressor; // log n for beta > 0, n^(-beta/(1-beta)) for beta < 0
        double fitted_slope = 0.0;
        double intercept = 0.0;
        double fit_r2 = 0.0;
        double expected_slope = 0.0; // -(d/2 + beta) for beta > 0; NaN when only the sign is predicted
    };

    /// Null-data rate study: regresses mean log BF on the transformed sample size.
    RateStudyResult verify_rates(const RateStudyConfig &config);

    // CSV `beta,d,fitted_slope,intercept,fit_r2,expected_slope,regressor`.
    void write_rates_csv(std::ostream &os, std::span<const RateStudyResult> results);
} // namespace bayesedge
