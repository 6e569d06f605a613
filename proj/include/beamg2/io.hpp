#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "curve.hpp"
#include "errors.hpp"
#include "montecarlo.hpp"

namespace beamg2 {

inline constexpr std::string_view kTimestampHeader = "# photon-timestamps v1";

/// Writes the photon-timestamps v1 format: the header line, then one
/// "time_s,detector" record per event with 9 fractional digits. Files written
/// here parse back and re-serialize byte-identically (for times below ~8e6 s,
/// where a 1e-9 s grid still resolves adjacent doubles).
inline void write_timestamps(const std::filesystem::path& path, const PhotonStream& stream) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw io_error("cannot open for writing: " + path.string());
    std::fprintf(f, "%s\n", std::string(kTimestampHeader).c_str());
    for (const auto& e : stream.events)
        std::fprintf(f, "%.9f,%d\n", e.time, e.detector);
    if (std::fclose(f) != 0) throw io_error("write failed: " + path.string());
}

/// Parses the photon-timestamps v1 format. The stream duration is not part of
/// the format; it is recovered as the last event time (0 for an empty file).
inline PhotonStream read_timestamps(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path.string());

    std::string line;
    if (!std::getline(in, line) || line != kTimestampHeader)
        throw io_error(path.string() + ": missing '" + std::string(kTimestampHeader) +
                       "' header line");

    PhotonStream stream;
    std::size_t line_no = 1;
    double prev = -1.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw io_error(path.string() + ":" + std::to_string(line_no) +
                           ": expected 'time_s,detector'");
        char* end = nullptr;
        const std::string tstr = line.substr(0, comma);
        const double t = std::strtod(tstr.c_str(), &end);
        if (end != tstr.c_str() + tstr.size() || tstr.empty())
            throw io_error(path.string() + ":" + std::to_string(line_no) + ": bad time field");
        const std::string dstr = line.substr(comma + 1);
        if (dstr != "0" && dstr != "1")
            throw io_error(path.string() + ":" + std::to_string(line_no) +
                           ": detector must be 0 or 1");
        if (t < prev)
            throw io_error(path.string() + ":" + std::to_string(line_no) +
                           ": times must be nondecreasing");
        prev = t;
        stream.events.push_back({t, dstr == "1" ? 1 : 0});
    }
    stream.duration = stream.events.empty() ? 0.0 : stream.events.back().time;
    return stream;
}

namespace detail {

inline std::string shortest(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace detail

/// Writes a CSV curve file: a header row, then one row of numeric columns per
/// grid point, each number in shortest round-trip form.
inline void write_curve_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!std::isfinite(row[i]))
                throw numeric_error("curve file rejects non-finite value in column " +
                                    columns[i]);
            out << (i ? "," : "") << detail::shortest(row[i]);
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

inline void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& curve,
                            const std::string& tau_column = "tau_s") {
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.tau.size());
    for (std::size_t i = 0; i < curve.tau.size(); ++i)
        rows.push_back({curve.tau[i], curve.g2[i], curve.sigma[i]});
    write_curve_csv(path, {tau_column, "g2", "sigma"}, rows);
}

} // namespace beamg2
