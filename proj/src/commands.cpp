#include "bayesedge/commands.hpp"

#include "bayesedge/bayes.hpp"
#include "bayesedge/detector.hpp"
#include "bayesedge/errors.hpp"
#include "bayesedge/eval.hpp"
#include "bayesedge/image_io.hpp"
#include "bayesedge/manifest.hpp"
#include "bayesedge/pipeline.hpp"
#include "bayesedge/prior.hpp"
#include "bayesedge/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace bayesedge
{
    namespace
    {
        using Json = nlohmann::ordered_json;

        // Files are assembled in memory and only written once every computation succeeded.
        class OutputSet
        {
        public:
            void text(const std::string &name, std::string content) { files_.emplace_back(name, std::move(content)); }

            void gray(const std::string &name, const GrayImage &img) { images_.emplace_back(name, img); }

            void mask(const std::string &name, const Mask &mask) { masks_.emplace_back(name, mask); }

            std::vector<std::string> names() const
            {
                std::vector<std::string> out;
                for (const auto &f : images_)
                    out.push_back(f.first);
                for (const auto &f : masks_)
                    out.push_back(f.first);
                for (const auto &f : files_)
                    out.push_back(f.first);
                out.push_back("manifest.json");
                return out;
            }

            void commit(const fs::path &dir, RunManifest manifest) const
            {
                std::error_code ec;
                fs::create_directories(dir, ec);
                if (ec)
                    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
                for (const auto &[name, img] : images_)
                    write_pgm(dir / name, img);
                for (const auto &[name, m] : masks_)
                    write_mask_pgm(dir / name, m);
                for (const auto &[name, content] : files_)
                {
                    std::ofstream os(dir / name, std::ios::binary);
                    os << content;
                    if (!os)
                        throw IoError("failed writing " + (dir / name).string());
                }
                manifest.outputs = names();
                write_manifest(dir / "manifest.json", manifest);
            }

        private:
            std::vector<std::pair<std::string, std::string>> files_;
            std::vector<std::pair<std::string, GrayImage>> images_;
            std::vector<std::pair<std::string, Mask>> masks_;
        };

        template <typename Writer>
        std::string render(Writer &&writer)
        {
            std::ostringstream os;
            writer(os);
            return os.str();
        }

        struct DetectionFlags
        {
            double beta = -2.0;
            std::optional<double> sigma_s;
            std::string surface = "smooth";
            std::vector<double> sigma_diag{1.0, 1.0};
            int n = 1;
            bool no_standardize = false;
            double tail_sigma = 1.0;
            double tail_alpha = 1.0;

            void attach(CLI::App *app)
            {
                app->add_option("--beta", beta, "kernel exponent beta (nonzero)")->capture_default_str();
                app->add_option("--sigma-s", sigma_s, "Gaussian smoothing SD (overrides --surface)");
                app->add_option("--surface", surface, "rough (sigma_s = 6) or smooth (sigma_s = 2)")
                    ->check(CLI::IsMember({"rough", "smooth"}))
                    ->capture_default_str();
                app->add_option("--sigma-diag", sigma_diag, "diagonal of the prior scale matrix Sigma")
                    ->delimiter(',')
                    ->expected(2)
                    ->capture_default_str();
                app->add_option("--n", n, "directional differences use offsets -n..n")->capture_default_str();
                app->add_flag("--no-standardize", no_standardize, "skip standardization after smoothing");
                app->add_option("--tail-sigma", tail_sigma, "scale of the tail function g")->capture_default_str();
                app->add_option("--tail-alpha", tail_alpha, "exponent of the tail function g")->capture_default_str();
            }

            DetectionConfig config() const
            {
                DetectionConfig cfg;
                cfg.beta = beta;
                cfg.sigma_s = sigma_s ? *sigma_s : (surface == "rough" ? 6.0 : 2.0);
                if (sigma_diag.size() != 2)
                    throw InvalidArgument("--sigma-diag needs two values");
                cfg.sigma = Eigen::Vector2d(sigma_diag[0], sigma_diag[1]).asDiagonal();
                cfg.n = n;
                cfg.standardize = !no_standardize;
                cfg.tail = {tail_sigma, tail_alpha};
                validate(cfg);
                return cfg;
            }
        };

        Json detection_json(const DetectionConfig &cfg)
        {
            Json j;
            j["beta"] = cfg.beta;
            j["sigma_s"] = cfg.sigma_s;
            j["sigma_diag"] = {cfg.sigma(0, 0), cfg.sigma(1, 1)};
            j["n"] = cfg.n;
            j["standardize"] = cfg.standardize;
            j["tail_sigma"] = cfg.tail.sigma_g;
            j["tail_alpha"] = cfg.tail.alpha;
            j["quadrature_nodes"] = cfg.quadrature_nodes;
            j["quadrature_half_width"] = cfg.quadrature_half_width;
            return j;
        }

        GrayImage edge_overlay(const GrayImage &img, const Mask &mask)
        {
            GrayImage out = img.max(0.0).min(1.0);
            for (Eigen::Index i = 0; i < out.size(); ++i)
                if (mask.data()[i])
                    out.data()[i] = 0.0;
            return out;
        }

        RunManifest base_manifest(const std::vector<std::string> &args, const std::string &command,
                                  const std::string &output, std::uint64_t seed)
        {
            RunManifest m;
            m.command = command;
            m.argv = args;
            m.seed = seed;
            for (std::size_t i = args.size(); i-- > 1;)
                if (args[i] == output)
                {
                    m.output_index = i;
                    break;
                }
            if (m.output_index == 0)
                throw InvalidArgument("output directory must be given as a positional argument");
            return m;
        }

        struct Cli
        {
            const std::vector<std::string> &args;
            std::ostream &out;
            std::ostream &err;
            std::function<int()> action;
        };

        void add_detect(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("detect", "edge map of one image");
            struct Opts
            {
                std::string input, output, detector = "bayes";
                DetectionFlags det;
                std::uint64_t seed = 0;
                bool log_bf = false;
            };
            auto o = std::make_shared<Opts>();
            sub->add_option("input", o->input, "PGM or PNG image")->required();
            sub->add_option("output", o->output, "output directory")->required();
            sub->add_option("--detector", o->detector, "bayes or canny")
                ->check(CLI::IsMember({"bayes", "canny"}))
                ->capture_default_str();
            o->det.attach(sub);
            sub->add_option("--seed", o->seed, "seed for threshold subsampling")->capture_default_str();
            sub->add_flag("--log-bf", o->log_bf, "also write log_bf.csv (bayes only)");
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    const DetectionConfig cfg = o->det.config();
                    if (o->log_bf && o->detector != "bayes")
                        throw InvalidArgument("--log-bf requires --detector bayes");
                    RunManifest manifest = base_manifest(cli.args, "detect", o->output, o->seed);
                    const GrayImage img = read_image(o->input);

                    OutputSet files;
                    EdgeMap edges;
                    if (o->detector == "bayes")
                    {
                        const BayesDetection d = run_bayes_detector(img, cfg, o->seed);
                        edges = d.edges;
                        if (o->log_bf)
                            files.text("log_bf.csv", render([&](std::ostream &os) { write_field_csv(os, d.log_bf); }));
                    }
                    else
                    {
                        edges = detect_canny(img, cfg);
                    }
                    files.mask("edges.pgm", edges.mask);
                    files.gray("overlay.pgm", edge_overlay(img, edges.mask));

                    manifest.inputs = {o->input};
                    manifest.params = detection_json(cfg);
                    manifest.params["detector"] = o->detector;
                    manifest.params["threshold"] = edges.threshold;
                    manifest.params["edge_pixels"] = static_cast<long>(edges.mask.cast<long>().sum());
                    files.commit(o->output, manifest);
                    cli.out << fmt::format("{} edge pixels written to {}\n", manifest.params["edge_pixels"].get<long>(),
                                           (fs::path(o->output) / "edges.pgm").string());
                    return exit_ok;
                };
            });
        }

        void add_pipeline(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("pipeline", "edge detection through damage classification");
            struct Opts
            {
                std::string input, output;
                DetectionFlags det;
                PipelineConfig pipe;
                std::uint64_t seed = 0;
            };
            auto o = std::make_shared<Opts>();
            sub->add_option("input", o->input, "PGM or PNG image")->required();
            sub->add_option("output", o->output, "output directory")->required();
            o->det.attach(sub);
            sub->add_option("--cluster-gap", o->pipe.cluster_gap, "merge damage fragments closer than this (px)")
                ->capture_default_str();
            sub->add_option("--min-region-area", o->pipe.min_region_area, "smallest reported region (px)")
                ->capture_default_str();
            sub->add_option("--min-region-thickness", o->pipe.min_region_thickness,
                            "smallest inscribed chessboard radius of a reported region")
                ->capture_default_str();
            sub->add_option("--min-damage-area", o->pipe.min_damage_area, "smallest damage hull area")->capture_default_str();
            sub->add_option("--frame", o->pipe.frame_width, "width of the edge frame added at the border")
                ->capture_default_str();
            sub->add_option("--seed", o->seed, "seed for threshold subsampling")->capture_default_str();
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    PipelineConfig cfg = o->pipe;
                    cfg.detection = o->det.config();
                    validate(cfg);
                    RunManifest manifest = base_manifest(cli.args, "pipeline", o->output, o->seed);
                    const GrayImage img = read_image(o->input);
                    const PipelineResult result = run_pipeline(img, cfg, o->seed);

                    OutputSet files;
                    files.mask("edges.pgm", result.closed);
                    files.gray("overlay.pgm", damage_overlay(img.max(0.0).min(1.0), result.report));
                    files.text("damage.csv", render([&](std::ostream &os) { write_damage_csv(os, result.report); }));

                    manifest.inputs = {o->input};
                    manifest.params = detection_json(cfg.detection);
                    manifest.params["frame_width"] = cfg.frame_width;
                    manifest.params["min_region_area"] = cfg.min_region_area;
                    manifest.params["min_region_thickness"] = cfg.min_region_thickness;
                    manifest.params["cluster_gap"] = cfg.cluster_gap;
                    manifest.params["min_damage_area"] = cfg.min_damage_area;
                    files.commit(o->output, manifest);
                    for (const RegionDamage &r : result.report.regions)
                        cli.out << fmt::format("region {}: fraction {:.4f} -> {}\n", r.region_id, r.fraction,
                                               to_string(r.action));
                    return exit_ok;
                };
            });
        }

        PriorFamily parse_family(const std::string &s)
        {
            return s == "generalized" ? PriorFamily::generalized : PriorFamily::truncated;
        }

        void add_bf_study(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("bf-study", "expected weight of evidence and convergence rates");
            struct Opts
            {
                std::string output;
                std::vector<double> betas{-2.0, -1.0, 1.0, 2.0};
                std::vector<double> theta0s = default_study_means();
                std::vector<std::size_t> ns = default_study_sizes();
                std::size_t reps = 1000;
                std::vector<std::size_t> rate_ns{100, 316, 1000, 3162, 10000};
                std::size_t rate_reps = 500;
                int d = 1;
                std::string family = "truncated";
                double sigma = 1.0, lower = -1.0, upper = 1.0, tail_sigma = 1.0, tail_alpha = 1.0;
                std::uint64_t seed = 0;
            };
            auto o = std::make_shared<Opts>();
            sub->add_option("output", o->output, "output directory")->required();
            sub->add_option("--betas", o->betas, "kernel exponents")->delimiter(',')->capture_default_str();
            sub->add_option("--theta0-list", o->theta0s, "true means of the simulated data")->delimiter(',');
            sub->add_option("--n-grid", o->ns, "sample sizes of the evidence table")->delimiter(',');
            sub->add_option("--reps", o->reps, "replications per evidence cell")->capture_default_str();
            sub->add_option("--rate-n-grid", o->rate_ns, "sample sizes of the rate regression")
                ->delimiter(',')
                ->capture_default_str();
            sub->add_option("--rate-reps", o->rate_reps, "replications per rate point")->capture_default_str();
            sub->add_option("--d", o->d, "dimension of the rate study (1 or 2)")
                ->check(CLI::IsMember({1, 2}))
                ->capture_default_str();
            sub->add_option("--family", o->family, "truncated or generalized")
                ->check(CLI::IsMember({"truncated", "generalized"}))
                ->capture_default_str();
            sub->add_option("--sigma", o->sigma, "kernel scale")->capture_default_str();
            sub->add_option("--lower", o->lower, "truncation lower bound")->capture_default_str();
            sub->add_option("--upper", o->upper, "truncation upper bound")->capture_default_str();
            sub->add_option("--tail-sigma", o->tail_sigma, "scale of the tail function g")->capture_default_str();
            sub->add_option("--tail-alpha", o->tail_alpha, "exponent of the tail function g")->capture_default_str();
            sub->add_option("--seed", o->seed, "simulation seed")->capture_default_str();
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    StudyPrior prior{parse_family(o->family), o->sigma, {o->lower, o->upper}, {o->tail_sigma, o->tail_alpha}};
                    if (o->betas.empty() || o->theta0s.empty() || o->ns.empty())
                        throw InvalidArgument("beta, theta0 and n grids must be nonempty");
                    if (o->reps < 1 || o->rate_reps < 2)
                        throw InvalidArgument("--reps must be >= 1 and --rate-reps >= 2");
                    for (double b : o->betas)
                        (void)make_study_prior(prior, b); // rejects beta = 0 and bad supports
                    for (std::size_t n : o->ns)
                        if (n < 1)
                            throw InvalidArgument("sample sizes must be positive");
                    if (o->rate_ns.size() < 4)
                        throw InsufficientGrid("the rate regression needs at least 4 sample sizes");
                    if (!std::is_sorted(o->rate_ns.begin(), o->rate_ns.end())
                        || std::adjacent_find(o->rate_ns.begin(), o->rate_ns.end()) != o->rate_ns.end() || o->rate_ns[0] < 1)
                        throw InvalidArgument("--rate-n-grid must be strictly increasing and positive");
                    RunManifest manifest = base_manifest(cli.args, "bf-study", o->output, o->seed);

                    EvidenceStudyConfig study{o->betas, o->theta0s, o->ns, o->reps, o->seed, prior};
                    const auto cells = weight_of_evidence_study(study);

                    std::vector<RateStudyResult> rates;
                    for (std::size_t i = 0; i < o->betas.size(); ++i)
                    {
                        RateStudyConfig rc{o->betas[i], o->d, o->rate_ns, o->rate_reps, derive_seed(o->seed, 1000 + i), prior};
                        rates.push_back(verify_rates(rc));
                    }

                    OutputSet files;
                    files.text("weight_of_evidence.csv", render([&](std::ostream &os) { write_evidence_csv(os, cells); }));
                    files.text("rates.csv", render([&](std::ostream &os) { write_rates_csv(os, rates); }));
                    manifest.params["betas"] = o->betas;
                    manifest.params["theta0s"] = o->theta0s;
                    manifest.params["n_grid"] = o->ns;
                    manifest.params["reps"] = o->reps;
                    manifest.params["rate_n_grid"] = o->rate_ns;
                    manifest.params["rate_reps"] = o->rate_reps;
                    manifest.params["d"] = o->d;
                    manifest.params["family"] = o->family;
                    manifest.params["sigma"] = o->sigma;
                    manifest.params["bounds"] = {o->lower, o->upper};
                    manifest.params["tail"] = {o->tail_sigma, o->tail_alpha};
                    files.commit(o->output, manifest);
                    for (const RateStudyResult &r : rates)
                        cli.out << fmt::format("beta {:g}: slope {:.4f} (expected {:.4f}), R^2 {:.4f}\n", r.beta,
                                               r.fitted_slope, r.expected_slope, r.fit_r2);
                    return exit_ok;
                };
            });
        }

        void add_prior_curve(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("prior-curve", "density curve of one reflected prior");
            struct Opts
            {
                std::string output, family = "truncated";
                double beta = 2.0, theta0 = 0.0, sigma = 1.0, lower = -3.0, upper = 3.0;
                double tail_sigma = 1.0, tail_alpha = 1.0;
                std::optional<double> from, to;
                std::size_t points = 601;
            };
            auto o = std::make_shared<Opts>();
            sub->add_option("output", o->output, "output directory")->required();
            sub->add_option("--beta", o->beta, "kernel exponent")->capture_default_str();
            sub->add_option("--theta0", o->theta0, "null value")->capture_default_str();
            sub->add_option("--sigma", o->sigma, "kernel scale")->capture_default_str();
            sub->add_option("--family", o->family, "truncated or generalized")
                ->check(CLI::IsMember({"truncated", "generalized"}))
                ->capture_default_str();
            sub->add_option("--lower", o->lower, "truncation lower bound")->capture_default_str();
            sub->add_option("--upper", o->upper, "truncation upper bound")->capture_default_str();
            sub->add_option("--tail-sigma", o->tail_sigma, "scale of the tail function g")->capture_default_str();
            sub->add_option("--tail-alpha", o->tail_alpha, "exponent of the tail function g")->capture_default_str();
            sub->add_option("--from", o->from, "first grid point (default: lower bound or theta0 - 4 sigma)");
            sub->add_option("--to", o->to, "last grid point (default: upper bound or theta0 + 4 sigma)");
            sub->add_option("--points", o->points, "grid size")->capture_default_str();
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    if (o->points < 2)
                        throw InvalidArgument("--points must be at least 2");
                    const Kernel<double> k{o->theta0, o->sigma, o->beta};
                    const bool truncated = o->family == "truncated";
                    const PriorSpec prior = truncated ? PriorSpec::truncated(k, o->lower, o->upper)
                                                      : PriorSpec::generalized(k, {o->tail_sigma, o->tail_alpha});
                    const double lo = o->from.value_or(truncated ? o->lower : o->theta0 - 4.0 * o->sigma);
                    const double hi = o->to.value_or(truncated ? o->upper : o->theta0 + 4.0 * o->sigma);
                    if (!(lo < hi))
                        throw InvalidArgument("grid must satisfy from < to");
                    RunManifest manifest = base_manifest(cli.args, "prior-curve", o->output, 0);
                    const auto grid = linspace(lo, hi, o->points);
                    const auto curve = density_curve(prior, grid);

                    OutputSet files;
                    files.text("prior_curve.csv", render([&](std::ostream &os) { write_density_curve_csv(os, curve); }));
                    manifest.params["family"] = o->family;
                    manifest.params["beta"] = o->beta;
                    manifest.params["theta0"] = o->theta0;
                    manifest.params["sigma"] = o->sigma;
                    if (truncated)
                        manifest.params["bounds"] = {o->lower, o->upper};
                    else
                        manifest.params["tail"] = {o->tail_sigma, o->tail_alpha};
                    manifest.params["grid"] = {lo, hi, o->points};
                    manifest.params["tau"] = prior.tau();
                    files.commit(o->output, manifest);
                    cli.out << fmt::format("normalizing constant {:.12g}\n", prior.tau());
                    return exit_ok;
                };
            });
        }

        void add_simulate(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("simulate", "noise sweep comparing the Bayesian and Canny detectors");
            struct Opts
            {
                std::string output, image, truth;
                DetectionFlags det;
                SweepConfig sweep;
                int size = 128;
                double contrast = 2.0;
            };
            auto o = std::make_shared<Opts>();
            o->det.sigma_s = 1.25;
            sub->add_option("output", o->output, "output directory")->required();
            sub->add_option("--image", o->image, "base image (default: synthetic shapes)");
            sub->add_option("--truth", o->truth, "truth pixel CSV for --image");
            sub->add_option("--size", o->size, "side of the synthetic image")->capture_default_str();
            sub->add_option("--contrast", o->contrast, "shape intensity over a zero background")->capture_default_str();
            sub->add_option("--sd-list", o->sweep.sds, "noise standard deviations")->delimiter(',')->capture_default_str();
            sub->add_option("--runs", o->sweep.runs, "runs per noise level")->capture_default_str();
            sub->add_option("--kappa", o->sweep.kappa, "matching distance")->capture_default_str();
            sub->add_option("--seed", o->sweep.seed, "noise seed")->capture_default_str();
            o->det.attach(sub);
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    SweepConfig cfg = o->sweep;
                    cfg.detection = o->det.config();
                    if (cfg.runs < 1)
                        throw InvalidArgument("--runs must be at least 1");
                    if (!(cfg.kappa > 0.0))
                        throw InvalidArgument("--kappa must be positive");
                    if (cfg.sds.empty())
                        throw InvalidArgument("--sd-list must be nonempty");
                    for (double sd : cfg.sds)
                        if (!(sd >= 0.0))
                            throw InvalidArgument("noise SDs must be nonnegative");
                    if (o->image.empty() != o->truth.empty())
                        throw InvalidArgument("--image and --truth must be given together");
                    if (!(o->contrast > 0.0))
                        throw InvalidArgument("--contrast must be positive");
                    RunManifest manifest = base_manifest(cli.args, "simulate", o->output, cfg.seed);

                    SyntheticImage base;
                    if (o->image.empty())
                        base = shapes_image(o->size, o->contrast);
                    else
                    {
                        base.image = read_image(o->image);
                        base.truth = read_truth_csv(o->truth);
                        manifest.inputs = {o->image, o->truth};
                    }
                    const auto rows = run_noise_sweep(base.image, base.truth, cfg);

                    OutputSet files;
                    files.text("sweep.csv", render([&](std::ostream &os) { write_sweep_csv(os, rows); }));
                    manifest.params = detection_json(cfg.detection);
                    manifest.params["sds"] = cfg.sds;
                    manifest.params["runs"] = cfg.runs;
                    manifest.params["kappa"] = cfg.kappa;
                    if (o->image.empty())
                    {
                        manifest.params["size"] = o->size;
                        manifest.params["contrast"] = o->contrast;
                    }
                    files.commit(o->output, manifest);
                    for (const SweepSummary &s : summarize_sweep(rows))
                        cli.out << fmt::format("sd {:g} {}: mean r_s {:.3f}, mean r_t {:.3f}\n", s.sd, to_string(s.detector),
                                               s.mean_r_s, s.mean_r_t);
                    return exit_ok;
                };
            });
        }

        void add_synth(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("synth", "synthetic test image with its truth pixels");
            struct Opts
            {
                std::string output, kind = "shapes";
                int size = 128;
                double contrast = 1.0, noise_sd = 0.0, defect_fraction = 0.0;
                std::uint64_t seed = 0;
            };
            auto o = std::make_shared<Opts>();
            sub->add_option("output", o->output, "output directory")->required();
            sub->add_option("--kind", o->kind, "shapes, square, step or shingle")
                ->check(CLI::IsMember({"shapes", "square", "step", "shingle"}))
                ->capture_default_str();
            sub->add_option("--size", o->size, "image side (shapes, square, step)")->capture_default_str();
            sub->add_option("--contrast", o->contrast, "foreground intensity in (0, 1]")->capture_default_str();
            sub->add_option("--noise-sd", o->noise_sd, "white noise added before quantization")->capture_default_str();
            sub->add_option("--defect-fraction", o->defect_fraction, "disk defect area over shingle area")
                ->capture_default_str();
            sub->add_option("--seed", o->seed, "noise seed")->capture_default_str();
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    if (!(o->contrast > 0.0 && o->contrast <= 1.0))
                        throw InvalidArgument("--contrast must lie in (0, 1] for 8-bit output");
                    if (!(o->noise_sd >= 0.0))
                        throw InvalidArgument("--noise-sd must be nonnegative");
                    RunManifest manifest = base_manifest(cli.args, "synth", o->output, o->seed);

                    SyntheticImage s;
                    if (o->kind == "shapes")
                        s = shapes_image(o->size, o->contrast);
                    else if (o->kind == "square")
                        s = square_image(o->size, o->contrast);
                    else if (o->kind == "step")
                        s = step_image(o->size, o->size, o->size / 2, o->contrast);
                    else
                    {
                        ShingleSpec spec;
                        spec.defect_fraction = o->defect_fraction;
                        const ShingleImage sh = shingle_image(spec);
                        s.image = sh.image;
                        s.truth = mask_pixels(sh.defect);
                        manifest.params["defect_area"] = sh.defect_area;
                        manifest.params["shingle_area"] = sh.shingle_area;
                    }
                    s.image = add_white_noise(s.image, o->noise_sd, o->seed);

                    OutputSet files;
                    files.gray("image.pgm", s.image);
                    files.text("image.truth.csv", render([&](std::ostream &os) { write_truth_csv(os, s.truth); }));
                    manifest.params["kind"] = o->kind;
                    manifest.params["size"] = o->size;
                    manifest.params["contrast"] = o->contrast;
                    manifest.params["noise_sd"] = o->noise_sd;
                    manifest.params["defect_fraction"] = o->defect_fraction;
                    files.commit(o->output, manifest);
                    cli.out << fmt::format("{} truth pixels\n", s.truth.size());
                    return exit_ok;
                };
            });
        }

        void add_rerun(CLI::App &app, Cli &cli)
        {
            auto *sub = app.add_subcommand("rerun", "repeat a command from its manifest.json");
            struct Opts
            {
                std::string manifest, output;
            };
            auto o = std::make_shared<Opts>();
            sub->add_option("manifest", o->manifest, "manifest.json of an earlier run")->required();
            sub->add_option("--output", o->output, "write to this directory instead of the recorded one");
            sub->callback([o, &cli] {
                cli.action = [o, &cli] {
                    const RunManifest m = read_manifest(o->manifest);
                    if (m.command == "rerun")
                        throw InvalidArgument("a rerun manifest cannot be replayed");
                    return run_cli(replay_arguments(m, o->output), cli.out, cli.err);
                };
            });
        }
    } // namespace

    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Bayesian edge detection with reflected non-local priors", "bayesedge"};
        app.require_subcommand(1);
        app.set_version_flag("--version", std::string(tool_version));
        Cli cli{args, out, err, {}};
        add_detect(app, cli);
        add_pipeline(app, cli);
        add_bf_study(app, cli);
        add_prior_curve(app, cli);
        add_simulate(app, cli);
        add_synth(app, cli);
        add_rerun(app, cli);

        try
        {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        }
        catch (const CLI::ParseError &e)
        {
            return app.exit(e, out, err) == 0 ? exit_ok : exit_user_error;
        }

        try
        {
            return cli.action ? cli.action() : exit_ok;
        }
        catch (const QuadratureFailure &e)
        {
            err << "numerical failure: " << e.what() << '\n';
            return exit_numerical_failure;
        }
        catch (const Error &e)
        {
            err << "error: " << e.what() << '\n';
            return exit_user_error;
        }
        catch (const std::exception &e)
        {
            err << "internal error: " << e.what() << '\n';
            return exit_numerical_failure;
        }
    }
} // namespace bayesedge
