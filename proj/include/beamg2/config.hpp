#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "atom.hpp"
#include "beam.hpp"
#include "cavityphase.hpp"
#include "errors.hpp"
#include "montecarlo.hpp"

namespace beamg2 {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view value) {
    const std::string v(value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty())
        throw config_error("config key '" + std::string(key) + "': not a number: '" + v + "'");
    return x;
}

inline std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw config_error("config key '" + std::string(key) + "': not an unsigned integer: '" +
                           std::string(value) + "'");
    return x;
}

inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Flat key = value run configuration covering every module parameter.
/// Unknown keys and out-of-domain values are rejected with the offending key
/// named. Defaults reproduce the figure-1 scenario in units of t0 = 1 s, with
/// mode geometry chosen so the transit time is 35 us.
struct RunConfig {
    AtomParams atom{0.1, 25.0, 0.0};
    BeamParams beam{0.1, 1.0, ArrivalModel::Poisson, 0.0, EnvelopeShape::TopHat};
    double background_ratio = 0.0;
    DetectorParams detector1{};
    DetectorParams detector2{};
    double sim_duration = 1e5;
    std::uint64_t sim_seed = 1;
    double corr_bin_width = 0.01;
    double corr_max_lag = 2.0;
    double stats_window = 1.0;
    ModeGeometry geometry{780e-9, 35e-6, 1.0};
    KinematicParams kinematics{2.0, 0.0975};
    double phase_window = 2e-6;
    std::uint64_t phase_samples = 100000;

    static RunConfig from_string(std::string_view text);
    static RunConfig from_file(const std::filesystem::path& path);

    void set(std::string_view key, std::string_view value);
    void validate() const;
    std::string canonical() const;
    std::string digest() const;
};

inline void RunConfig::set(std::string_view key, std::string_view value) {
    using detail::parse_double;
    using detail::parse_u64;
    if (key == "atom.beta") atom.beta = parse_double(key, value);
    else if (key == "atom.omega") atom.omega = parse_double(key, value);
    else if (key == "atom.delta") atom.delta = parse_double(key, value);
    else if (key == "beam.nbar") beam.nbar = parse_double(key, value);
    else if (key == "beam.t0") beam.t0 = parse_double(key, value);
    else if (key == "beam.arrival_model") {
        if (value == "poisson") beam.arrival_model = ArrivalModel::Poisson;
        else if (value == "deadtime") beam.arrival_model = ArrivalModel::DeadTime;
        else
            throw config_error("config key 'beam.arrival_model': expected poisson or deadtime, "
                               "got '" + std::string(value) + "'");
    } else if (key == "beam.dead_time") beam.dead_time = parse_double(key, value);
    else if (key == "beam.envelope") {
        if (value == "tophat") beam.envelope = EnvelopeShape::TopHat;
        else if (value == "gaussian") beam.envelope = EnvelopeShape::Gaussian;
        else
            throw config_error("config key 'beam.envelope': expected tophat or gaussian, got '" +
                               std::string(value) + "'");
    } else if (key == "background.ratio") background_ratio = parse_double(key, value);
    else if (key == "detector1.efficiency") detector1.efficiency = parse_double(key, value);
    else if (key == "detector1.dark_rate") detector1.dark_rate = parse_double(key, value);
    else if (key == "detector1.dead_time") detector1.dead_time = parse_double(key, value);
    else if (key == "detector2.efficiency") detector2.efficiency = parse_double(key, value);
    else if (key == "detector2.dark_rate") detector2.dark_rate = parse_double(key, value);
    else if (key == "detector2.dead_time") detector2.dead_time = parse_double(key, value);
    else if (key == "sim.duration") sim_duration = parse_double(key, value);
    else if (key == "sim.seed") sim_seed = parse_u64(key, value);
    else if (key == "corr.bin_width") corr_bin_width = parse_double(key, value);
    else if (key == "corr.max_lag") corr_max_lag = parse_double(key, value);
    else if (key == "stats.window") stats_window = parse_double(key, value);
    else if (key == "geometry.lambda") geometry.lambda = parse_double(key, value);
    else if (key == "geometry.w0") geometry.w0 = parse_double(key, value);
    else if (key == "geometry.vz") kinematics.v_z = parse_double(key, value);
    else if (key == "geometry.sigma_vx") kinematics.sigma_vx = parse_double(key, value);
    else if (key == "phase.window") phase_window = parse_double(key, value);
    else if (key == "phase.samples") phase_samples = parse_u64(key, value);
    else
        throw config_error("unknown config key '" + std::string(key) + "'");
}

inline RunConfig RunConfig::from_string(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
        cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

inline void RunConfig::validate() const {
    atom.validate();
    beam.validate();
    if (!(background_ratio >= 0.0) || !std::isfinite(background_ratio))
        throw config_error("background.ratio must be finite and >= 0");
    detector1.validate("detector1");
    detector2.validate("detector2");
    if (!(sim_duration > 0.0) || !std::isfinite(sim_duration))
        throw config_error("sim.duration must be finite and > 0");
    if (!(corr_bin_width > 0.0)) throw config_error("corr.bin_width must be > 0");
    if (!(corr_max_lag >= corr_bin_width))
        throw config_error("corr.max_lag must be >= corr.bin_width");
    if (!(stats_window > 0.0)) throw config_error("stats.window must be > 0");
    geometry.validate();
    kinematics.validate();
    if (!(phase_window > 0.0)) throw config_error("phase.window must be > 0");
    if (phase_samples < 1000) throw config_error("phase.samples must be >= 1000");
}

inline std::string RunConfig::canonical() const {
    using detail::format_double;
    std::string s;
    auto put = [&s](std::string_view key, const std::string& value) {
        s.append(key);
        s.append(" = ");
        s.append(value);
        s.push_back('\n');
    };
    put("atom.beta", format_double(atom.beta));
    put("atom.delta", format_double(atom.delta));
    put("atom.omega", format_double(atom.omega));
    put("background.ratio", format_double(background_ratio));
    put("beam.arrival_model",
        beam.arrival_model == ArrivalModel::Poisson ? "poisson" : "deadtime");
    put("beam.dead_time", format_double(beam.dead_time));
    put("beam.envelope", beam.envelope == EnvelopeShape::TopHat ? "tophat" : "gaussian");
    put("beam.nbar", format_double(beam.nbar));
    put("beam.t0", format_double(beam.t0));
    put("corr.bin_width", format_double(corr_bin_width));
    put("corr.max_lag", format_double(corr_max_lag));
    put("detector1.dark_rate", format_double(detector1.dark_rate));
    put("detector1.dead_time", format_double(detector1.dead_time));
    put("detector1.efficiency", format_double(detector1.efficiency));
    put("detector2.dark_rate", format_double(detector2.dark_rate));
    put("detector2.dead_time", format_double(detector2.dead_time));
    put("detector2.efficiency", format_double(detector2.efficiency));
    put("geometry.lambda", format_double(geometry.lambda));
    put("geometry.sigma_vx", format_double(kinematics.sigma_vx));
    put("geometry.vz", format_double(kinematics.v_z));
    put("geometry.w0", format_double(geometry.w0));
    put("phase.samples", std::to_string(phase_samples));
    put("phase.window", format_double(phase_window));
    put("sim.duration", format_double(sim_duration));
    put("sim.seed", std::to_string(sim_seed));
    put("stats.window", format_double(stats_window));
    return s;
}

inline std::string RunConfig::digest() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(canonical())));
    return buf;
}

} // namespace beamg2
