// Experiment runner: seeded reproducible simulations of the continuous
// fuzzy energy measurement of a driven two-level system, CSV emission for
// the density/statistics figures, and the oracle suite.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qmeas/config.hpp"
#include "qmeas/csv.hpp"
#include "qmeas/ensemble.hpp"
#include "qmeas/micro.hpp"
#include "qmeas/readout.hpp"
#include "qmeas/rng.hpp"
#include "qmeas/rpi.hpp"
#include "qmeas/validate.hpp"

namespace {

using namespace qmeas;

constexpr int kExitConfig = 1;
constexpr int kExitFeasibility = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::uint64_t require_seed(const CommonArgs& args) {
    if (!args.seed_set)
        throw std::invalid_argument("--seed is required for stochastic commands");
    return args.seed;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    CsvWriter csv(path, {"t", "re_c1", "im_c1", "re_c2", "im_c2", "p2", "norm_sq"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        csv.cell(traj.times[i])
            .cell(traj.amplitudes[i].c1.real())
            .cell(traj.amplitudes[i].c1.imag())
            .cell(traj.amplitudes[i].c2.real())
            .cell(traj.amplitudes[i].c2.imag())
            .cell(traj.p2[i])
            .cell(traj.norm_sq[i]);
        csv.end_row();
    }
}

void write_histogram_csv(const std::string& path, const Histogram2D& h) {
    CsvWriter csv(path, {"t_bin", "value_bin", "weight"});
    for (std::size_t ti = 0; ti < h.t_bins; ++ti)
        for (std::size_t vi = 0; vi < h.v_bins; ++vi) {
            csv.cell(h.t_center(ti)).cell(h.v_center(vi)).cell(h.at(ti, vi));
            csv.end_row();
        }
}

void write_stats_row(CsvWriter& csv, double ratio, const EnsembleStats& stats) {
    csv.cell(ratio)
        .cell(stats.p_transition_state)
        .cell(stats.p_transition_readout)
        .cell(stats.p_stay_readout)
        .cell(stats.noise);
    csv.end_row();
}

std::vector<std::pair<std::string, std::string>>
base_manifest(const RunConfig& rc, std::uint64_t seed, const std::string& mode) {
    auto entries = manifest_entries(rc);
    entries.emplace_back("run.mode", mode);
    entries.emplace_back("run.seed", std::to_string(seed));
    return entries;
}

SystemConfig with_ratio(const SystemConfig& base, double ratio, double t_rabi) {
    SystemConfig c = base;
    c.kappa = kappa_for_fuzziness(ratio, c.e2 - c.e1, t_rabi);
    return c;
}

int cmd_rpi_run(const CommonArgs& args) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    ensure_directory(args.out_dir);

    const ReadoutCurve curve = generate_readout(rc.system, rc.prior, seed);
    const Trajectory traj = integrate_rpi(rc.system, curve, AmplitudePair{});
    const ReadoutCurve smoothed = smooth_readout(curve, rc.smoothing_window);

    {
        CsvWriter csv(args.out_dir + "/readout.csv", {"t", "e", "e_smoothed"});
        for (std::size_t k = 0; k < curve.samples.size(); ++k) {
            csv.cell(curve.segment_start(k)).cell(curve.samples[k]).cell(smoothed.samples[k]);
            csv.end_row();
        }
    }
    write_trajectory_csv(args.out_dir + "/trajectory.csv", traj);

    auto manifest = base_manifest(rc, seed, "rpi-run");
    manifest.emplace_back("result.probability_density",
                          format_double(probability_density(traj)));
    manifest.emplace_back("result.final_p2", format_double(traj.final_p2()));
    write_manifest(args.out_dir + "/manifest.txt", manifest);
    return 0;
}

int cmd_ensemble(const CommonArgs& args, std::size_t n) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    ensure_directory(args.out_dir);

    EnsembleOptions options;
    options.smoothing_window = rc.smoothing_window;
    const EnsembleStats stats = run_ensemble(rc.system, rc.prior, n, seed, options);

    CsvWriter csv(args.out_dir + "/stats.csv",
                  {"ratio", "p_transition_state", "p_valid_pos", "p_valid_neg", "noise"});
    write_stats_row(csv, rc.scales.fuzziness_ratio, stats);
    write_histogram_csv(args.out_dir + "/density_e.csv", stats.density_e);
    write_histogram_csv(args.out_dir + "/density_p2.csv", stats.density_p2);

    auto manifest = base_manifest(rc, seed, "ensemble");
    manifest.emplace_back("run.n", std::to_string(n));
    manifest.emplace_back("result.effective_sample_size",
                          format_double(stats.effective_sample_size()));
    manifest.emplace_back("result.se_p_transition_state",
                          format_double(stats.se_p_transition_state));
    write_manifest(args.out_dir + "/manifest.txt", manifest);
    return 0;
}

int cmd_micro_run(const CommonArgs& args, const std::string& model_path, int series_n,
                  bool force) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    const MicroModelFile mf = load_model_file(model_path);
    ensure_directory(args.out_dir);

    const FeasibilityReport feas =
        feasibility_check(mf.model, rc.scales, series_n, mf.g.value_or(0.0),
                          mf.b.value_or(0.0), rc.system.t_total);
    {
        std::ofstream out(args.out_dir + "/feasibility.txt", std::ios::binary);
        out << feas.to_string();
    }
    if (!feas.all_ok() && !force) {
        std::cerr << "feasibility check failed (use --force to run anyway):\n"
                  << feas.to_string();
        return kExitFeasibility;
    }

    const MicroRun run = micro_trajectory(rc.system, mf.model, series_n, seed);
    {
        CsvWriter csv(args.out_dir + "/readout.csv", {"t", "n", "e"});
        for (std::size_t s = 0; s < run.series.size(); ++s) {
            csv.cell(run.readout.segment_start(s))
                .cell(run.series[s].n_ratio)
                .cell(run.series[s].energy);
            csv.end_row();
        }
    }
    write_trajectory_csv(args.out_dir + "/trajectory.csv", run.trajectory);

    auto manifest = base_manifest(rc, seed, "micro-run");
    manifest.emplace_back("model.p1", format_double(mf.model.p1));
    manifest.emplace_back("model.p2", format_double(mf.model.p2));
    manifest.emplace_back("model.tau", format_double(mf.model.tau));
    manifest.emplace_back("model.n_per_series", std::to_string(series_n));
    manifest.emplace_back(
        "model.implied_t_lr",
        format_double(level_resolution_time(mf.model, rc.scales).t_lr));
    write_manifest(args.out_dir + "/manifest.txt", manifest);
    return 0;
}

int cmd_compare(const CommonArgs& args, const std::string& model_path, int series_n,
                std::size_t n) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    ensure_directory(args.out_dir);

    ElementaryModel model;
    if (!model_path.empty()) {
        model = load_model_file(model_path).model;
    } else {
        model = model_for_config(rc.system, rc.micro_tau);
    }

    EnsembleOptions options;
    options.smoothing_window = rc.smoothing_window;
    const CrossSamplerReport report =
        cross_sampler_agreement(rc.system, model, series_n, rc.prior, n, seed, options);

    CsvWriter csv(args.out_dir + "/comparison.csv",
                  {"quantity", "rpi", "micro", "delta", "combined_se"});
    csv.cell(std::string("p_transition_state"))
        .cell(report.p_state_rpi)
        .cell(report.p_state_micro)
        .cell(report.delta_p_state())
        .cell(report.combined_se_p_state());
    csv.end_row();
    csv.cell(std::string("noise"))
        .cell(report.noise_rpi)
        .cell(report.noise_micro)
        .cell(report.delta_noise())
        .cell(report.combined_se_noise());
    csv.end_row();

    auto manifest = base_manifest(rc, seed, "compare");
    manifest.emplace_back("run.n", std::to_string(n));
    manifest.emplace_back("run.series_n", std::to_string(series_n));
    manifest.emplace_back("result.ess_rpi", format_double(report.ess_rpi));
    manifest.emplace_back("result.agrees_3sigma", report.agrees() ? "yes" : "no");
    write_manifest(args.out_dir + "/manifest.txt", manifest);

    std::cout << "p_transition_state: rpi=" << report.p_state_rpi
              << " micro=" << report.p_state_micro << " |delta|/se="
              << std::abs(report.delta_p_state()) /
                     std::max(report.combined_se_p_state(), 1e-300)
              << '\n';
    return 0;
}

int cmd_validate(const CommonArgs& args) {
    ensure_directory(args.out_dir);
    const auto rows = run_validation_suite(args.seed_set ? args.seed : 2024);
    CsvWriter csv(args.out_dir + "/validation.csv",
                  {"check", "value", "relation", "threshold", "pass"});
    bool all_pass = true;
    for (const auto& row : rows) {
        csv.cell(row.name)
            .cell(row.value)
            .cell(row.relation)
            .cell(row.threshold)
            .cell(std::string(row.pass ? "pass" : "FAIL"));
        csv.end_row();
        std::cout << (row.pass ? "[pass] " : "[FAIL] ") << row.name << " = " << row.value
                  << " (" << row.relation << ' ' << row.threshold << ")\n";
        all_pass = all_pass && row.pass;
    }
    return all_pass ? 0 : kExitNumerical;
}

int cmd_figure1(const CommonArgs& args, std::size_t n) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    ensure_directory(args.out_dir);

    EnsembleOptions options;
    options.smoothing_window = rc.smoothing_window;

    CsvWriter stats_csv(args.out_dir + "/stats.csv",
                        {"ratio", "p_transition_state", "p_valid_pos", "p_valid_neg",
                         "noise"});
    const struct {
        const char* name;
        double ratio;
        std::uint64_t stream;
    } panels[] = {{"soft", 10.0 / 3.0, 0}, {"hard", 2.0 / 3.0, 1}};
    for (const auto& panel : panels) {
        const SystemConfig cfg = with_ratio(rc.system, panel.ratio, rc.scales.t_rabi);
        const ElementaryModel model = model_for_config(cfg, rc.micro_tau);
        const EnsembleStats stats = run_micro_ensemble(cfg, model, rc.micro_n_per_series,
                                                       n, subseed(seed, panel.stream),
                                                       options);
        write_stats_row(stats_csv, panel.ratio, stats);
        write_histogram_csv(args.out_dir + "/" + panel.name + "_density_e.csv",
                            stats.density_e);
        write_histogram_csv(args.out_dir + "/" + panel.name + "_density_p2.csv",
                            stats.density_p2);
    }

    auto manifest = base_manifest(rc, seed, "figure1");
    manifest.emplace_back("run.n", std::to_string(n));
    manifest.emplace_back("run.estimator", "micro");
    write_manifest(args.out_dir + "/manifest.txt", manifest);
    return 0;
}

int cmd_figure2(const CommonArgs& args, std::size_t n) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    ensure_directory(args.out_dir);

    EnsembleOptions options;
    options.smoothing_window = rc.smoothing_window;

    const double ratio = 4.0 / 3.0;
    const SystemConfig cfg = with_ratio(rc.system, ratio, rc.scales.t_rabi);
    const ElementaryModel model = model_for_config(cfg, rc.micro_tau);

    const struct {
        const char* name;
        ReadoutSelection selection;
    } panels[] = {{"all", ReadoutSelection::kAll},
                  {"transition", ReadoutSelection::kReadoutUp},
                  {"no_transition", ReadoutSelection::kReadoutDown}};
    for (const auto& panel : panels) {
        const SelectedDensities d = micro_selected_densities(
            cfg, model, rc.micro_n_per_series, n, seed, panel.selection, options);
        write_histogram_csv(args.out_dir + "/" + panel.name + "_density_e.csv", d.density_e);
        write_histogram_csv(args.out_dir + "/" + panel.name + "_density_p2.csv",
                            d.density_p2);
    }

    auto manifest = base_manifest(rc, seed, "figure2");
    manifest.emplace_back("run.n", std::to_string(n));
    manifest.emplace_back("run.ratio", format_double(ratio));
    manifest.emplace_back("run.estimator", "micro");
    write_manifest(args.out_dir + "/manifest.txt", manifest);
    return 0;
}

int cmd_figure3(const CommonArgs& args, std::size_t n) {
    const RunConfig rc = load_run_config(args.config_path);
    const std::uint64_t seed = require_seed(args);
    ensure_directory(args.out_dir);

    EnsembleOptions options;
    options.smoothing_window = rc.smoothing_window;

    const std::vector<double> ratios = {2.0 / 3.0, 1.0, 4.0 / 3.0, 2.0, 8.0 / 3.0,
                                        10.0 / 3.0};
    CsvWriter csv(args.out_dir + "/stats.csv",
                  {"ratio", "estimator", "p_transition_state", "p_valid_pos", "p_valid_neg",
                   "noise", "effective_sample_size"});
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const SystemConfig cfg = with_ratio(rc.system, ratios[i], rc.scales.t_rabi);
        const ElementaryModel model = model_for_config(cfg, rc.micro_tau);
        const EnsembleStats micro = run_micro_ensemble(
            cfg, model, rc.micro_n_per_series, n, subseed(seed, 2 * i), options);
        csv.cell(ratios[i])
            .cell(std::string("micro"))
            .cell(micro.p_transition_state)
            .cell(micro.p_transition_readout)
            .cell(micro.p_stay_readout)
            .cell(micro.noise)
            .cell(micro.effective_sample_size());
        csv.end_row();

        // the weighted estimator works best with prior segments of about half
        // a resolution time, so the grid follows the sweep point; at hard
        // fuzziness its effective sample size collapses (reported column)
        PriorSpec prior = rc.prior;
        prior.dt = 0.5 * derive_scales(cfg).t_lr;
        const EnsembleStats rpi =
            run_ensemble(cfg, prior, n, subseed(seed, 2 * i + 1), options);
        csv.cell(ratios[i])
            .cell(std::string("rpi"))
            .cell(rpi.p_transition_state)
            .cell(rpi.p_transition_readout)
            .cell(rpi.p_stay_readout)
            .cell(rpi.noise)
            .cell(rpi.effective_sample_size());
        csv.end_row();
    }

    auto manifest = base_manifest(rc, seed, "figure3");
    manifest.emplace_back("run.n", std::to_string(n));
    write_manifest(args.out_dir + "/manifest.txt", manifest);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous fuzzy energy measurement of a driven two-level system"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "system config file");
    app.add_option("--out", common.out_dir, "output directory")->default_val("out");
    auto* seed_opt = app.add_option("--seed", common.seed, "rng seed");
    app.add_option("--threads", common.threads, "OpenMP thread count (0 = default)");

    std::size_t n_samples = 10000;
    std::string model_path;
    int series_n = 50;
    bool force = false;

    // config presence is validated at run time so the error lands on exit
    // code 1 rather than CLI11's parse-error code
    auto add_common = [&](CLI::App* sub) {
        sub->fallthrough();
        return sub;
    };

    auto* rpi_run = add_common(app.add_subcommand("rpi-run", "integrate one readout"));
    auto* ensemble =
        add_common(app.add_subcommand("ensemble", "flat-prior weighted ensemble"));
    ensemble->add_option("--n", n_samples, "trajectory count");
    auto* micro_run =
        add_common(app.add_subcommand("micro-run", "one weak-observation record"));
    micro_run->add_option("--model", model_path, "elementary model file")->required();
    micro_run->add_option("--series-n", series_n, "observations per series");
    micro_run->add_flag("--force", force, "run despite feasibility failures");
    auto* compare = add_common(app.add_subcommand("compare", "cross-sampler agreement"));
    compare->add_option("--model", model_path, "elementary model file");
    compare->add_option("--series-n", series_n, "observations per series");
    compare->add_option("--n", n_samples, "trajectory count");
    auto* validate = add_common(app.add_subcommand("validate", "run the oracle suite"));
    auto* figure1 = add_common(app.add_subcommand("figure1", "density plots, soft vs hard"));
    figure1->add_option("--n", n_samples, "trajectory count");
    auto* figure2 =
        add_common(app.add_subcommand("figure2", "moderate fuzziness selections"));
    figure2->add_option("--n", n_samples, "trajectory count");
    auto* figure3 =
        add_common(app.add_subcommand("figure3", "class probabilities vs fuzziness"));
    figure3->add_option("--n", n_samples, "trajectory count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitConfig;
    }

    common.seed_set = seed_opt->count() > 0;
    apply_threads(common.threads);

    try {
        auto need_config = [&]() {
            if (common.config_path.empty())
                throw std::invalid_argument("--config is required");
        };
        if (rpi_run->parsed()) {
            need_config();
            return cmd_rpi_run(common);
        }
        if (ensemble->parsed()) {
            need_config();
            return cmd_ensemble(common, n_samples);
        }
        if (micro_run->parsed()) {
            need_config();
            return cmd_micro_run(common, model_path, series_n, force);
        }
        if (compare->parsed()) {
            need_config();
            return cmd_compare(common, model_path, series_n, n_samples);
        }
        if (validate->parsed()) return cmd_validate(common);
        if (figure1->parsed()) {
            need_config();
            return cmd_figure1(common, n_samples);
        }
        if (figure2->parsed()) {
            need_config();
            return cmd_figure2(common, n_samples);
        }
        if (figure3->parsed()) {
            need_config();
            return cmd_figure3(common, n_samples);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
