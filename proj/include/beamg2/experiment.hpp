#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "config.hpp"
#include "montecarlo.hpp"

namespace beamg2 {

struct RunSummary {
    std::size_t source_events = 0;
    std::size_t total_events = 0;
    std::size_t d1_events = 0;
    std::size_t d2_events = 0;
    double duration = 0.0;
    double signal_rate = 0.0; // source events / duration
    double total_rate = 0.0;  // detected events / duration
    std::uint64_t seed = 0;
    std::string config_digest;
};

/// Full stochastic experiment: source transits, background, beamsplitter and
/// detectors. Deterministic for a given (config, seed): every random choice is
/// drawn from a substream keyed by its role, so the output bytes do not
/// depend on thread count or scheduling.
inline std::pair<PhotonStream, RunSummary> run_experiment(const RunConfig& cfg,
                                                          unsigned threads = 0) {
    cfg.validate();
    if (!(cfg.sim_duration >= 100.0 * cfg.beam.t0))
        throw config_error("sim.duration must be >= 100 * beam.t0");

    const std::uint64_t seed = cfg.sim_seed;
    const auto source =
        simulate_source(cfg.atom, cfg.beam, cfg.sim_duration, seed, threads);
    const double signal_rate = static_cast<double>(source.size()) / cfg.sim_duration;

    Rng bg_rng = Rng::substream(seed, Rng::Stream::background);
    const auto with_bg =
        add_background(source, cfg.background_ratio, signal_rate, cfg.sim_duration, bg_rng);

    Rng routing_rng = Rng::substream(seed, Rng::Stream::routing);
    Rng dark1_rng = Rng::substream(seed, Rng::Stream::dark1);
    Rng dark2_rng = Rng::substream(seed, Rng::Stream::dark2);
    PhotonStream stream = hbt_split(with_bg, cfg.detector1, cfg.detector2, cfg.sim_duration,
                                    routing_rng, dark1_rng, dark2_rng);
    stream.seed = seed;
    stream.config_digest = cfg.digest();

    RunSummary summary;
    summary.source_events = source.size();
    summary.total_events = stream.events.size();
    for (const auto& e : stream.events)
        (e.detector == 0 ? summary.d1_events : summary.d2_events) += 1;
    summary.duration = cfg.sim_duration;
    summary.signal_rate = signal_rate;
    summary.total_rate = static_cast<double>(stream.events.size()) / cfg.sim_duration;
    summary.seed = seed;
    summary.config_digest = stream.config_digest;
    return {std::move(stream), summary};
}

} // namespace beamg2
