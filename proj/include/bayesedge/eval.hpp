#pragma once

#include "detector.hpp"
#include "types.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bayesedge
{
    inline const double default_kappa = std::sqrt(18.0);

    struct MetricPair
    {
        double r_s = 1.0; // selected pixels near the truth
        double r_t = 0.0; // truth pixels near the selection
        double kappa = default_kappa;
    };

    /// Distance-tolerant precision/recall. An empty selection scores r_s = 1, r_t = 0.
    MetricPair metric_rs_rt(std::span<const Pixel> selected, std::span<const Pixel> truth, double kappa = default_kappa);

    PixelList mask_pixels(const Mask &mask);

    enum class Detector
    {
        bayes,
        canny
    };

    std::string to_string(Detector detector);

    struct SweepRow
    {
        double sd = 0.0;
        int run = 0;
        Detector detector = Detector::bayes;
        MetricPair metrics;
    };

    struct SweepConfig
    {
        std::vector<double> sds{0.2, 0.5, 1.0, 1.2, 1.5};
        int runs = 100;
        double kappa = default_kappa;
        DetectionConfig detection{};
        std::uint64_t seed = 0;
    };

    /// Both detectors on base + white noise for each (sd, run); rows ordered by sd, run, detector.
    std::vector<SweepRow> run_noise_sweep(const GrayImage &base, std::span<const Pixel> truth, const SweepConfig &cfg);

    // CSV `sd,run,detector,r_s,r_t,kappa`.
    void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows);

    struct SweepSummary
    {
        double sd = 0.0;
        Detector detector = Detector::bayes;
        double mean_r_s = 0.0;
        double mean_r_t = 0.0;
    };

    std::vector<SweepSummary> summarize_sweep(std::span<const SweepRow> rows);
} // namespace bayesedge
