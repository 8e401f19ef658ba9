#pragma once

#include "imaging.hpp"
#include "prior.hpp"
#include "types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>

namespace bayesedge
{
    struct DetectionConfig
    {
        double beta = -2.0;
        Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity(); // prior scale matrix
        double sigma_s = 2.0;                                // Gaussian smoothing SD
        int n = 1;                                           // 2n+1 differences per axis
        TailFunction tail{};
        bool standardize = true;
        // Each axis of [-w, w] is split at 0, +-s and +-3s (s = largest prior scale),
        // with `quadrature_nodes` Gauss-Legendre nodes per panel.
        int quadrature_nodes = 10;
        double quadrature_half_width = 8.0; // standardized units
    };

    void validate(const DetectionConfig &cfg);

    struct EdgeMap
    {
        Mask mask;
        double threshold = 0.0; // rho
    };

    /// Node tables for the per-pixel Bayes factor under one shared Omega.
    ///
    /// With m = 2n+1 difference pairs, log L(theta) - log L(0) reduces to
    /// m theta^T Omega^-1 gbar - (m/2) theta^T Omega^-1 theta, so each pixel
    /// costs one matrix-vector product and a log-sum-exp over the nodes.
    class BayesFactorTable
    {
    public:
        BayesFactorTable(const DetectionConfig &cfg, const Eigen::Matrix2d &omega);

        double log_bf(const Eigen::Vector2d &mean_difference) const;
        double log_bf(const GradientSamples &samples) const { return log_bf(samples.mean()); }

        const MultiPriorSpec &prior() const { return prior_; }

    private:
        MultiPriorSpec prior_;
        Eigen::ArrayXd offset_;
        Eigen::Matrix<double, Eigen::Dynamic, 2> slope_;
    };

    /// log BF at every interior pixel; border pixels get the interior minimum.
    ScalarField bf_map(const GrayImage &img, const DetectionConfig &cfg);

    struct GradientField
    {
        ScalarField gx;
        ScalarField gy;
        ScalarField magnitude;
    };

    // Binomial-weighted differences; (1, 2, 1)/4 for n = 1. Zero on the border.
    GradientField weighted_gradient(const GrayImage &img, int n);

    ScalarField canny_response(const GrayImage &img, const DetectionConfig &cfg);

    /// Keeps a value iff no 8-neighbour exceeds it; others drop to the global minimum.
    ScalarField non_max_suppress(const ScalarField &field);

    /// Two-cluster 1-D k-means solved exactly over sorted cuts; returns the largest
    /// value of the lower cluster.
    double kmeans_threshold(const ScalarField &field, std::uint64_t seed);
    double kmeans_threshold(std::vector<double> values, std::uint64_t seed);

    GrayImage preprocess_bayes(const GrayImage &img, const DetectionConfig &cfg);

    struct BayesDetection
    {
        ScalarField log_bf;
        ScalarField suppressed;
        EdgeMap edges;
    };

    BayesDetection run_bayes_detector(const GrayImage &img, const DetectionConfig &cfg, std::uint64_t seed);

    EdgeMap detect_bayes(const GrayImage &img, const DetectionConfig &cfg, std::uint64_t seed);
    EdgeMap detect_canny(const GrayImage &img, const DetectionConfig &cfg);

    // CSV `x,y,log_bf`.
    void write_field_csv(std::ostream &os, const ScalarField &field);
} // namespace bayesedge
