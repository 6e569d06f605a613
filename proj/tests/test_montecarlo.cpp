#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "beamg2/atom.hpp"
#include "beamg2/correlator.hpp"
#include "beamg2/experiment.hpp"
#include "beamg2/montecarlo.hpp"
#include "helpers.hpp"

using namespace beamg2;

namespace {

const AtomParams kFigAtom{0.1, 25.0, 0.0};
const BeamParams kFigBeam{0.1, 1.0, ArrivalModel::Poisson, 0.0, EnvelopeShape::TopHat};

PhotonStream ideal_split(const std::vector<double>& times, double duration,
                         std::uint64_t seed) {
    Rng route = Rng::substream(seed, Rng::Stream::routing);
    Rng dark1 = Rng::substream(seed, Rng::Stream::dark1);
    Rng dark2 = Rng::substream(seed, Rng::Stream::dark2);
    return hbt_split(times, DetectorParams{}, DetectorParams{}, duration, route, dark1, dark2);
}

} // namespace

TEST_CASE("no drive means an empty stream") {
    const AtomParams dark{0.1, 0.0, 0.0};
    CHECK(simulate_source(dark, kFigBeam, 1000.0, 5).empty());
}

TEST_CASE("seeded runs are bit-identical, independent of thread count") {
    RunConfig cfg;
    cfg.sim_duration = 2000.0;
    cfg.sim_seed = 99;
    const auto [s1, sum1] = run_experiment(cfg, 1);
    const auto [s2, sum2] = run_experiment(cfg, 1);
    const auto [s3, sum3] = run_experiment(cfg, 4);

    REQUIRE(s1.events.size() == s2.events.size());
    REQUIRE(s1.events.size() == s3.events.size());
    for (std::size_t i = 0; i < s1.events.size(); ++i) {
        REQUIRE(s1.events[i].time == s2.events[i].time);
        REQUIRE(s1.events[i].detector == s2.events[i].detector);
        REQUIRE(s1.events[i].time == s3.events[i].time);
        REQUIRE(s1.events[i].detector == s3.events[i].detector);
    }
    CHECK(sum1.config_digest == sum3.config_digest);
    CHECK(sum1.total_rate == static_cast<double>(s1.events.size()) / cfg.sim_duration);
}

TEST_CASE("ideal beamsplitter conserves photons and splits evenly") {
    const double duration = 5000.0;
    Rng src_rng(7);
    const auto times = testutil::poisson_stream(2.0, duration, src_rng);
    const PhotonStream stream = ideal_split(times, duration, 31);

    REQUIRE(stream.events.size() == times.size());
    const double n1 = static_cast<double>(stream.channel_times(0).size());
    const double n = static_cast<double>(times.size());
    CHECK(std::abs(n1 - 0.5 * n) < 3.0 * 0.5 * std::sqrt(n));
}

TEST_CASE("detector efficiency thins the stream binomially") {
    const double duration = 5000.0;
    Rng src_rng(8);
    const auto times = testutil::poisson_stream(2.0, duration, src_rng);

    DetectorParams lossy;
    lossy.efficiency = 0.4;
    Rng route = Rng::substream(77, Rng::Stream::routing);
    Rng dark1 = Rng::substream(77, Rng::Stream::dark1);
    Rng dark2 = Rng::substream(77, Rng::Stream::dark2);
    const PhotonStream stream =
        hbt_split(times, lossy, lossy, duration, route, dark1, dark2);
    const double kept = static_cast<double>(stream.events.size());
    const double expected = 0.4 * static_cast<double>(times.size());
    CHECK(std::abs(kept - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("detector dead time enforces a per-channel refractory gap") {
    DetectorParams dark_only;
    dark_only.efficiency = 0.0;
    dark_only.dark_rate = 50.0;
    dark_only.dead_time = 0.01;
    const double duration = 200.0;
    Rng route = Rng::substream(13, Rng::Stream::routing);
    Rng dark1 = Rng::substream(13, Rng::Stream::dark1);
    Rng dark2 = Rng::substream(13, Rng::Stream::dark2);
    const PhotonStream stream =
        hbt_split({}, dark_only, dark_only, duration, route, dark1, dark2);

    REQUIRE(!stream.events.empty());
    for (int ch = 0; ch < 2; ++ch) {
        const auto t = stream.channel_times(ch);
        for (std::size_t i = 1; i < t.size(); ++i)
            REQUIRE(t[i] - t[i - 1] >= dark_only.dead_time - 1e-12);
    }
}

TEST_CASE("source rate matches steady-state bookkeeping") {
    const double duration = 5e4;
    const auto times = simulate_source(kFigAtom, kFigBeam, duration, 12345);
    const double expected_rate =
        kFigBeam.nbar * 2.0 * kFigAtom.beta * excited_population(steady_state(kFigAtom));
    const double expected = expected_rate * duration;
    CHECK(std::abs(static_cast<double>(times.size()) - expected) <
          3.0 * std::sqrt(expected));
}

TEST_CASE("single-transit streams reproduce the atom correlation times the triangle") {
    // widely spaced deterministic transits; all pairs below t0 lag are same-atom
    const double t0 = 1.0;
    const std::size_t n_transits = 30000;
    const double spacing = 10.0;
    std::vector<double> arrivals(n_transits);
    for (std::size_t k = 0; k < n_transits; ++k)
        arrivals[k] = spacing * static_cast<double>(k);
    const double duration = spacing * static_cast<double>(n_transits);

    const auto times = simulate_transits(kFigAtom, EnvelopeShape::TopHat, t0, arrivals,
                                         duration, 2024, 1);

    const double bin = 0.1;
    const std::size_t nbins = 10;
    const auto counts = pair_histogram(times, times, bin, nbins);
    std::vector<std::uint64_t> pairs(counts);
    pairs[0] -= times.size(); // remove self-pairs at zero lag

    const double emission = 2.0 * kFigAtom.beta * excited_population(steady_state(kFigAtom));
    std::vector<double> expected(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        double acc = 0.0;
        const int sub = 10;
        for (int s = 0; s < sub; ++s) {
            const double tau = (static_cast<double>(k) + (s + 0.5) / sub) * bin;
            acc += g2_atom_closed_form(kFigAtom, tau) * (t0 - tau);
        }
        expected[k] = static_cast<double>(n_transits) * emission * emission * bin *
                      (acc / static_cast<double>(sub));
    }
    CHECK(testutil::reduced_chi_square(pairs, expected) < 2.0);
}

TEST_CASE("background merging: identity at b = 0 and additive rates") {
    const double duration = 10000.0;
    Rng src_rng(3);
    const auto times = testutil::poisson_stream(1.0, duration, src_rng);

    Rng bg_rng = Rng::substream(55, Rng::Stream::background);
    const auto unchanged = add_background(times, 0.0, 1.0, duration, bg_rng);
    REQUIRE(unchanged == times);

    const auto merged = add_background(times, 0.5, 1.0, duration, bg_rng);
    const double expected = 1.5 * duration;
    CHECK(std::abs(static_cast<double>(merged.size()) - expected) <
          3.0 * std::sqrt(expected));
    for (std::size_t i = 1; i < merged.size(); ++i) REQUIRE(merged[i] >= merged[i - 1]);
}

TEST_CASE("pure background correlates flat") {
    const double duration = 4000.0;
    Rng bg_rng = Rng::substream(91, Rng::Stream::background);
    const auto bg = add_background({}, 1.0, 4.0, duration, bg_rng);
    const PhotonStream stream = ideal_split(bg, duration, 17);

    const CorrelationCurve curve = cross_correlation(
        stream.channel_times(0), stream.channel_times(1), {0.05, 2.0}, duration);
    std::size_t within = 0;
    for (std::size_t k = 0; k < curve.g2.size(); ++k)
        if (std::abs(curve.g2[k] - 1.0) < 3.0 * curve.sigma[k]) ++within;
    CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(curve.g2.size()));
}

TEST_CASE("halving the efficiency leaves the estimated g2 unchanged") {
    const AtomParams atom{1.0, 3.0, 0.0};
    const double duration = 2e4;
    Rng rng(21);
    auto env = [](double) { return 1.0; };
    const auto times = sample_emission_times(atom, env, duration, rng);

    const PhotonStream full = ideal_split(times, duration, 40);
    DetectorParams half;
    half.efficiency = 0.5;
    Rng route = Rng::substream(41, Rng::Stream::routing);
    Rng dark1 = Rng::substream(41, Rng::Stream::dark1);
    Rng dark2 = Rng::substream(41, Rng::Stream::dark2);
    const PhotonStream thin = hbt_split(times, half, half, duration, route, dark1, dark2);

    const HistogramSpec spec{0.1, 5.0};
    const CorrelationCurve g_full = cross_correlation(full.channel_times(0),
                                                      full.channel_times(1), spec, duration);
    const CorrelationCurve g_thin = cross_correlation(thin.channel_times(0),
                                                      thin.channel_times(1), spec, duration);
    std::size_t within = 0;
    for (std::size_t k = 0; k < g_full.g2.size(); ++k)
        if (std::abs(g_full.g2[k] - g_thin.g2[k]) < 3.0 * g_thin.sigma[k]) ++within;
    CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(g_full.g2.size()));
}

TEST_CASE("run_experiment validates the configuration") {
    RunConfig cfg;
    cfg.sim_duration = 50.0; // < 100 * t0
    CHECK_THROWS_AS(run_experiment(cfg), config_error);

    RunConfig bad;
    bad.atom.beta = -1.0;
    CHECK_THROWS_AS(run_experiment(bad), config_error);
}

TEST_CASE("gaussian envelope transits produce a sane stream") {
    BeamParams beam = kFigBeam;
    beam.envelope = EnvelopeShape::Gaussian;
    const auto times = simulate_source(kFigAtom, beam, 2000.0, 77);
    CHECK(!times.empty());
    for (std::size_t i = 1; i < times.size(); ++i) REQUIRE(times[i] >= times[i - 1]);
    for (const double t : times) REQUIRE((t >= 0.0 && t < 2000.0));
}
