#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "atom.hpp"
#include "beam.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace beamg2 {

struct DetectorParams {
    double efficiency = 1.0;
    double dark_rate = 0.0;
    double dead_time = 0.0;

    void validate(const char* which) const {
        if (!(efficiency >= 0.0 && efficiency <= 1.0))
            throw config_error(std::string(which) + ".efficiency must be in [0, 1]");
        if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate))
            throw config_error(std::string(which) + ".dark_rate must be finite and >= 0");
        if (!(dead_time >= 0.0) || !std::isfinite(dead_time))
            throw config_error(std::string(which) + ".dead_time must be finite and >= 0");
    }
};

struct PhotonEvent {
    double time;
    int detector; // 0 or 1
};

/// Time-ordered detection records from the two detectors of the
/// beamsplitter arrangement.
struct PhotonStream {
    std::vector<PhotonEvent> events; // nondecreasing times in [0, duration)
    double duration = 0.0;
    std::string config_digest;
    std::uint64_t seed = 0;

    std::vector<double> channel_times(int detector) const {
        std::vector<double> out;
        for (const auto& e : events)
            if (e.detector == detector) out.push_back(e.time);
        return out;
    }

    std::vector<double> all_times() const {
        std::vector<double> out;
        out.reserve(events.size());
        for (const auto& e : events) out.push_back(e.time);
        return out;
    }
};

namespace detail {

// Local-time emission sampling for one transit. The envelope modulates the
// Rabi amplitude; for a Gaussian crossing the amplitude tails extend past the
// nominal transit, so the integration window is widened until the residual
// amplitude is negligible.
inline std::vector<double> transit_emissions(const AtomParams& atom, EnvelopeShape shape,
                                             double t0, Rng& rng) {
    if (shape == EnvelopeShape::TopHat) {
        auto env = [](double) { return 1.0; };
        return sample_emission_times(atom, env, t0, rng);
    }
    // Amplitude envelope exp(-4 (s - t0/2)^2 / t0^2), whose square is the
    // intensity envelope h; windowed to center +- 1.25 t0 (amplitude 2e-3).
    const double lead = 0.75 * t0;
    auto env = [t0, lead](double s) {
        const double x = (s - lead - 0.5 * t0) / t0;
        return std::exp(-4.0 * x * x);
    };
    auto local = sample_emission_times(atom, env, 2.5 * t0, rng);
    for (double& t : local) t -= lead;
    return local;
}

} // namespace detail

/// Emission times from a set of transits with given arrival times. Each
/// transit k is driven by its own rng substream keyed by k, so the merged
/// stream is independent of how transits are scheduled across threads.
/// Emissions outside [0, duration) are discarded.
inline std::vector<double> simulate_transits(const AtomParams& atom, EnvelopeShape shape,
                                             double t0, std::span<const double> arrivals,
                                             double duration, std::uint64_t seed,
                                             unsigned threads = 0) {
    atom.validate();
    if (atom.omega == 0.0) return {};

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, 64);

    std::vector<std::vector<double>> per_atom(arrivals.size());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            Rng rng = Rng::substream(seed, Rng::Stream::atom, k);
            auto local = detail::transit_emissions(atom, shape, t0, rng);
            auto& out = per_atom[k];
            out.reserve(local.size());
            for (double s : local) {
                const double t = arrivals[k] + s;
                if (t >= 0.0 && t < duration) out.push_back(t);
            }
        }
    };

    if (threads <= 1 || arrivals.size() < 2 * threads) {
        worker(0, arrivals.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (arrivals.size() + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(arrivals.size(), begin + chunk);
            if (begin < end) pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    std::vector<double> merged;
    std::size_t total = 0;
    for (const auto& v : per_atom) total += v.size();
    merged.reserve(total);
    for (const auto& v : per_atom) merged.insert(merged.end(), v.begin(), v.end());
    std::sort(merged.begin(), merged.end());
    return merged;
}

/// Full fluorescence source: sample the arrival process, run a quantum-jump
/// transit per atom, merge all emission times into one sorted stream.
inline std::vector<double> simulate_source(const AtomParams& atom, const BeamParams& beam,
                                           double duration, std::uint64_t seed,
                                           unsigned threads = 0) {
    beam.validate();
    if (!(duration >= 100.0 * beam.t0))
        throw config_error("sim.duration must be >= 100 * beam.t0");
    Rng arrival_rng = Rng::substream(seed, Rng::Stream::arrivals);
    const auto arrivals = sample_arrivals(beam, duration, arrival_rng);
    return simulate_transits(atom, beam.envelope, beam.t0, arrivals, duration, seed, threads);
}

/// Merge an independent homogeneous Poisson background of rate
/// ratio * signal_rate into the stream.
inline std::vector<double> add_background(std::span<const double> times, double ratio,
                                          double signal_rate, double duration, Rng& rng) {
    if (!(ratio >= 0.0)) throw config_error("background.ratio must be >= 0");
    if (ratio == 0.0 || signal_rate <= 0.0)
        return {times.begin(), times.end()};

    const double bg_rate = ratio * signal_rate;
    std::vector<double> bg;
    bg.reserve(static_cast<std::size_t>(bg_rate * duration * 1.1) + 16);
    double t = rng.exponential(bg_rate);
    while (t < duration) {
        bg.push_back(t);
        t += rng.exponential(bg_rate);
    }

    std::vector<double> merged;
    merged.resize(times.size() + bg.size());
    std::merge(times.begin(), times.end(), bg.begin(), bg.end(), merged.begin());
    return merged;
}

/// Hanbury Brown-Twiss detection chain: each photon goes to detector 0 or 1
/// with probability 1/2, survives with probability eta_i, then per-detector
/// dark counts are merged and events closer than dead_time to the previous
/// kept event on the same detector are dropped.
inline PhotonStream hbt_split(std::span<const double> times, const DetectorParams& d1,
                              const DetectorParams& d2, double duration, Rng& routing_rng,
                              Rng& dark1_rng, Rng& dark2_rng) {
    d1.validate("detector1");
    d2.validate("detector2");

    std::vector<double> det[2];
    for (const double t : times) {
        const int ch = routing_rng.bernoulli(0.5) ? 1 : 0;
        const double eta = ch == 0 ? d1.efficiency : d2.efficiency;
        if (eta >= 1.0 || routing_rng.bernoulli(eta)) det[ch].push_back(t);
    }

    const DetectorParams* params[2] = {&d1, &d2};
    Rng* dark_rng[2] = {&dark1_rng, &dark2_rng};
    for (int ch = 0; ch < 2; ++ch) {
        if (params[ch]->dark_rate > 0.0) {
            std::vector<double> dark;
            double t = dark_rng[ch]->exponential(params[ch]->dark_rate);
            while (t < duration) {
                dark.push_back(t);
                t += dark_rng[ch]->exponential(params[ch]->dark_rate);
            }
            std::vector<double> merged(det[ch].size() + dark.size());
            std::merge(det[ch].begin(), det[ch].end(), dark.begin(), dark.end(),
                       merged.begin());
            det[ch] = std::move(merged);
        }
        if (params[ch]->dead_time > 0.0) {
            std::vector<double> kept;
            kept.reserve(det[ch].size());
            double last = -std::numeric_limits<double>::infinity();
            for (const double t : det[ch]) {
                if (t - last >= params[ch]->dead_time) {
                    kept.push_back(t);
                    last = t;
                }
            }
            det[ch] = std::move(kept);
        }
    }

    PhotonStream stream;
    stream.duration = duration;
    stream.events.reserve(det[0].size() + det[1].size());
    std::size_t i = 0, j = 0;
    while (i < det[0].size() || j < det[1].size()) {
        const bool take0 = j == det[1].size() ||
                           (i < det[0].size() && det[0][i] <= det[1][j]);
        if (take0)
            stream.events.push_back({det[0][i++], 0});
        else
            stream.events.push_back({det[1][j++], 1});
    }
    return stream;
}

} // namespace beamg2
