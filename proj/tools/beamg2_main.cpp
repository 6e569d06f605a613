// beamg2 -- photon statistics of fluorescence from a stochastic atomic beam.
//
// Subcommands:
//   analytic   model curves g2_atom, F, g2_beam for a configured run
//   figure1    the canonical beam-fluorescence curves (with/without background)
//   simulate   quantum-jump Monte Carlo -> photon timestamp file
//   correlate  cross-correlate a timestamp file on the two detectors
//   stats      photon-counting Mandel Q of a timestamp file
//   phase      emitted-field phase excursions from atomic motion
//
// Exit codes: 0 ok, 2 config/usage error, 3 I/O error, 4 numeric failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamg2/cavityphase.hpp"
#include "beamg2/composite.hpp"
#include "beamg2/config.hpp"
#include "beamg2/correlator.hpp"
#include "beamg2/experiment.hpp"
#include "beamg2/io.hpp"

namespace {

using namespace beamg2;

RunConfig load_config(const std::string& path) {
    RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::from_file(path);
    cfg.validate();
    return cfg;
}

std::vector<double> tau_grid_over_t0(double max_over_t0, double step_over_t0) {
    std::vector<double> grid;
    const auto n = static_cast<std::size_t>(max_over_t0 / step_over_t0 + 0.5);
    grid.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        grid.push_back(static_cast<double>(i) * step_over_t0);
    return grid;
}

void print_kv(const char* key, double value) {
    std::printf("%s=%s\n", key, detail::shortest(value).c_str());
}

void print_kv(const char* key, std::size_t value) {
    std::printf("%s=%zu\n", key, value);
}

int cmd_analytic(const std::string& config_path, const std::string& out_path) {
    const RunConfig cfg = load_config(config_path);
    const double t0 = cfg.beam.t0;

    double q_a = 0.0;
    if (cfg.beam.arrival_model == ArrivalModel::DeadTime) {
        if (cfg.beam.dead_time < t0)
            throw config_error("analytic: no closed-form atom-number Q for dead_time < t0; "
                               "use simulate + stats");
        q_a = -cfg.beam.nbar; // at most one atom present -> Bernoulli counts
    }

    const auto over = tau_grid_over_t0(3.0, 0.005);
    std::vector<double> tau;
    tau.reserve(over.size());
    for (double x : over) tau.push_back(x * t0);

    const AtomCorrelation atom_corr = g2_atom(cfg.atom, tau);
    const CorrelationCurve beam_curve = g2_beam(cfg.atom, cfg.beam, q_a, tau);
    const CorrelationCurve diluted =
        g2_with_background(beam_curve, BackgroundModel{cfg.background_ratio});

    std::vector<std::vector<double>> rows;
    rows.reserve(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i)
        rows.push_back({over[i], atom_corr.g2[i], envelope_overlap_at(cfg.beam, tau[i]),
                        beam_curve.g2[i], diluted.g2[i]});
    write_curve_csv(out_path, {"tau_over_t0", "g2_atom", "F", "g2_beam", "g2_beam_bg"}, rows);
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), rows.size());
    return 0;
}

int cmd_figure1(const std::string& out_path) {
    const auto grid = tau_grid_over_t0(3.0, 0.005);
    const auto [clean, diluted] = figure1_curves(grid);

    std::vector<std::vector<double>> rows;
    rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        rows.push_back({grid[i], clean.g2[i], diluted.g2[i]});
    write_curve_csv(out_path, {"tau_over_t0", "g2_nobg", "g2_bg05"}, rows);
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), rows.size());
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::uint64_t* seed_override) {
    RunConfig cfg = load_config(config_path);
    if (seed_override) cfg.sim_seed = *seed_override;

    const auto [stream, summary] = run_experiment(cfg);
    write_timestamps(out_path, stream);

    print_kv("events", summary.total_events);
    print_kv("d1_events", summary.d1_events);
    print_kv("d2_events", summary.d2_events);
    print_kv("source_events", summary.source_events);
    print_kv("duration", summary.duration);
    print_kv("signal_rate", summary.signal_rate);
    print_kv("rate", summary.total_rate);
    std::printf("seed=%llu\n", static_cast<unsigned long long>(summary.seed));
    std::printf("config_digest=%s\n", summary.config_digest.c_str());
    return 0;
}

int cmd_correlate(const std::string& in_path, const std::string& out_path,
                  const std::string& config_path, const double* bin, const double* maxlag) {
    const RunConfig cfg = load_config(config_path);
    HistogramSpec spec{bin ? *bin : cfg.corr_bin_width, maxlag ? *maxlag : cfg.corr_max_lag};

    const PhotonStream stream = read_timestamps(in_path);
    const auto a = stream.channel_times(0);
    const auto b = stream.channel_times(1);
    const CorrelationCurve curve = cross_correlation(a, b, spec, stream.duration);
    write_curve_csv(out_path, curve, "tau_s");

    print_kv("d1_events", a.size());
    print_kv("d2_events", b.size());
    print_kv("duration", stream.duration);
    print_kv("bins", curve.tau.size());
    return 0;
}

int cmd_stats(const std::string& in_path, const std::string& config_path,
              const double* window) {
    const RunConfig cfg = load_config(config_path);
    const double w = window ? *window : cfg.stats_window;

    const PhotonStream stream = read_timestamps(in_path);
    const auto times = stream.all_times();
    const CountingStats stats = counting_stats(times, w, stream.duration);

    print_kv("events", times.size());
    print_kv("duration", stream.duration);
    print_kv("window", stats.window);
    print_kv("windows", stats.windows);
    print_kv("mean", stats.mean);
    print_kv("variance", stats.variance);
    print_kv("q", stats.q);
    print_kv("sigma_q", stats.sigma_q);
    std::printf("classification=%s\n", to_string(classify(stats.q, stats.sigma_q)));
    return 0;
}

int cmd_phase(const std::string& config_path, const std::string& out_path,
              const std::uint64_t* seed_override) {
    RunConfig cfg = load_config(config_path);
    if (seed_override) cfg.sim_seed = *seed_override;

    Rng rng = Rng::substream(cfg.sim_seed, Rng::Stream::phase);
    const auto samples = sample_excursions(cfg.geometry, cfg.kinematics, cfg.phase_window,
                                           cfg.phase_samples, rng);
    const ExcursionStats stats = summarize_excursions(samples);

    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples)
        rows.push_back({s.delta_phi, static_cast<double>(s.sign_flips)});
    write_curve_csv(out_path, {"delta_phi_rad", "sign_flips"}, rows);

    print_kv("samples", stats.samples);
    print_kv("transit_time", transit_time(cfg.geometry, cfg.kinematics));
    print_kv("mean", stats.mean);
    print_kv("se_mean", stats.se_mean);
    print_kv("std", stats.std_dev);
    print_kv("se_std", stats.se_std);
    print_kv("fraction_ge_half_pi", stats.fraction_ge_half_pi);
    print_kv("se_fraction", stats.se_fraction);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photon statistics of fluorescence from a stochastic atomic beam"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path;
    double bin = 0.0, maxlag = 0.0, window = 0.0;
    std::uint64_t seed = 0;
    bool has_bin = false, has_maxlag = false, has_window = false, has_seed = false;

    auto add_common = [&](CLI::App* cmd, bool with_config, bool with_in, bool with_out) {
        if (with_config) cmd->add_option("--config", config_path, "run configuration file");
        if (with_in) cmd->add_option("--in", in_path, "input timestamp file")->required();
        if (with_out) cmd->add_option("--out", out_path, "output file")->required();
    };

    CLI::App* analytic = app.add_subcommand("analytic", "write model curves as CSV");
    add_common(analytic, true, false, true);

    CLI::App* figure1 = app.add_subcommand("figure1", "write the canonical beam curves");
    add_common(figure1, false, false, true);

    CLI::App* simulate = app.add_subcommand("simulate", "run the Monte Carlo experiment");
    add_common(simulate, true, false, true);
    simulate->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        has_seed = true;
    });

    CLI::App* correlate = app.add_subcommand("correlate", "cross-correlate D1 x D2");
    add_common(correlate, true, true, true);
    correlate->add_option("--bin", bin, "bin width [s]")->each([&](const std::string&) {
        has_bin = true;
    });
    correlate->add_option("--maxlag", maxlag, "maximum lag [s]")->each([&](const std::string&) {
        has_maxlag = true;
    });

    CLI::App* stats = app.add_subcommand("stats", "photon-counting statistics");
    add_common(stats, true, true, false);
    stats->add_option("--window", window, "counting window [s]")->each([&](const std::string&) {
        has_window = true;
    });

    CLI::App* phase = app.add_subcommand("phase", "emitted-field phase excursions");
    add_common(phase, true, false, true);
    phase->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        has_seed = true;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (analytic->parsed()) return cmd_analytic(config_path, out_path);
        if (figure1->parsed()) return cmd_figure1(out_path);
        if (simulate->parsed())
            return cmd_simulate(config_path, out_path, has_seed ? &seed : nullptr);
        if (correlate->parsed())
            return cmd_correlate(in_path, out_path, config_path, has_bin ? &bin : nullptr,
                                 has_maxlag ? &maxlag : nullptr);
        if (stats->parsed())
            return cmd_stats(in_path, config_path, has_window ? &window : nullptr);
        if (phase->parsed()) return cmd_phase(config_path, out_path, has_seed ? &seed : nullptr);
    } catch (const beamg2::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const beamg2::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const beamg2::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 2;
}
