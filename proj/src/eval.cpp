#include "bayesedge/eval.hpp"

#include "bayesedge/errors.hpp"
#include "bayesedge/imaging.hpp"
#include "bayesedge/parallel.hpp"

#include <fmt/format.h>

#include <map>
#include <ostream>
#include <unordered_map>

namespace bayesedge
{
    namespace
    {
        // Uniform buckets of side kappa; any match lies in the 3x3 block around a point's bucket.
        class PointGrid
        {
        public:
            PointGrid(std::span<const Pixel> points, double kappa) : cell_(kappa)
            {
                for (const Pixel &p : points)
                    buckets_[key(p)].push_back(p);
            }

            bool has_within(Pixel p, double kappa2) const
            {
                const auto [cx, cy] = cell(p);
                for (long long dy = -1; dy <= 1; ++dy)
                    for (long long dx = -1; dx <= 1; ++dx)
                    {
                        const auto it = buckets_.find(pack(cx + dx, cy + dy));
                        if (it == buckets_.end())
                            continue;
                        for (const Pixel &q : it->second)
                        {
                            const double ex = p.x - q.x, ey = p.y - q.y;
                            if (ex * ex + ey * ey <= kappa2)
                                return true;
                        }
                    }
                return false;
            }

        private:
            std::pair<long long, long long> cell(Pixel p) const
            {
                return {static_cast<long long>(std::floor(p.x / cell_)), static_cast<long long>(std::floor(p.y / cell_))};
            }
            static long long pack(long long cx, long long cy) { return (cx << 32) ^ (cy & 0xFFFFFFFFll); }
            long long key(Pixel p) const
            {
                const auto [cx, cy] = cell(p);
                return pack(cx, cy);
            }

            double cell_;
            std::unordered_map<long long, std::vector<Pixel>> buckets_;
        };

        double matched_fraction(std::span<const Pixel> from, const PointGrid &to, double kappa2)
        {
            std::size_t hits = 0;
            for (const Pixel &p : from)
                hits += to.has_within(p, kappa2) ? 1 : 0;
            return static_cast<double>(hits) / static_cast<double>(from.size());
        }
    } // namespace

    MetricPair metric_rs_rt(std::span<const Pixel> selected, std::span<const Pixel> truth, double kappa)
    {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw InvalidArgument("kappa must be positive");
        if (truth.empty())
            throw EmptyTruth("truth set is empty");
        MetricPair m;
        m.kappa = kappa;
        if (selected.empty())
            return m;
        // Inclusive, with slack for kappa^2 rounding below an integer (sqrt(18)^2 < 18).
        const double kappa2 = kappa * kappa * (1.0 + 1e-12);
        m.r_s = matched_fraction(selected, PointGrid(truth, kappa), kappa2);
        m.r_t = matched_fraction(truth, PointGrid(selected, kappa), kappa2);
        return m;
    }

    PixelList mask_pixels(const Mask &mask)
    {
        PixelList out;
        for (int y = 0; y < height(mask); ++y)
            for (int x = 0; x < width(mask); ++x)
                if (mask(y, x))
                    out.push_back({x, y});
        return out;
    }

    std::string to_string(Detector detector) { return detector == Detector::bayes ? "bayes" : "canny"; }

    std::vector<SweepRow> run_noise_sweep(const GrayImage &base, std::span<const Pixel> truth, const SweepConfig &cfg)
    {
        if (cfg.runs < 1)
            throw InvalidArgument("runs must be at least 1");
        if (truth.empty())
            throw EmptyTruth("truth set is empty");
        for (double sd : cfg.sds)
            if (!(sd >= 0.0) || !std::isfinite(sd))
                throw InvalidArgument("noise SDs must be nonnegative");
        validate(cfg.detection);

        const std::size_t runs = static_cast<std::size_t>(cfg.runs);
        std::vector<SweepRow> rows(2 * cfg.sds.size() * runs);
        parallel_for(cfg.sds.size() * runs, [&](std::size_t cell) {
            const double sd = cfg.sds[cell / runs];
            const int run = static_cast<int>(cell % runs);
            const std::uint64_t run_seed = derive_seed(cfg.seed, cell);
            const GrayImage noisy = add_white_noise(base, sd, run_seed);
            const PixelList bayes = mask_pixels(detect_bayes(noisy, cfg.detection, run_seed).mask);
            const PixelList canny = mask_pixels(detect_canny(noisy, cfg.detection).mask);
            rows[2 * cell] = {sd, run, Detector::bayes, metric_rs_rt(bayes, truth, cfg.kappa)};
            rows[2 * cell + 1] = {sd, run, Detector::canny, metric_rs_rt(canny, truth, cfg.kappa)};
        });
        return rows;
    }

    void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows)
    {
        os << "sd,run,detector,r_s,r_t,kappa\n";
        for (const SweepRow &r : rows)
            os << fmt::format("{:.12g},{},{},{:.12g},{:.12g},{:.12g}\n", r.sd, r.run, to_string(r.detector), r.metrics.r_s,
                              r.metrics.r_t, r.metrics.kappa);
    }

    std::vector<SweepSummary> summarize_sweep(std::span<const SweepRow> rows)
    {
        std::map<std::pair<double, int>, std::pair<SweepSummary, int>> acc;
        std::vector<std::pair<double, int>> order;
        for (const SweepRow &r : rows)
        {
            const auto k = std::pair{r.sd, static_cast<int>(r.detector)};
            auto [it, fresh] = acc.try_emplace(k, SweepSummary{r.sd, r.detector, 0.0, 0.0}, 0);
            if (fresh)
                order.push_back(k);
            it->second.first.mean_r_s += r.metrics.r_s;
            it->second.first.mean_r_t += r.metrics.r_t;
            ++it->second.second;
        }
        std::vector<SweepSummary> out;
        for (const auto &k : order)
        {
            auto [s, count] = acc.at(k);
            s.mean_r_s /= count;
            s.mean_r_t /= count;
            out.push_back(s);
        }
        return out;
    }
} // namespace bayesedge
