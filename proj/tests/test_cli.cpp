#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "beamg2/io.hpp"
#include "beamg2/rng.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string output;
};

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "beamg2-cli-tests";
    fs::create_directories(dir);
    return dir;
}

fs::path temp_path(const std::string& name) {
    static int counter = 0;
    return work_dir() / (name + "-" + std::to_string(counter++));
}

CliResult run_cli(const std::string& args) {
    const fs::path capture = temp_path("capture");
    const std::string cmd =
        std::string(BEAMG2_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    return {code, buf.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path write_config(const std::string& body) {
    const fs::path p = temp_path("config");
    std::ofstream(p) << body;
    return p;
}

std::vector<std::vector<double>> parse_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string summary_value(const std::string& output, const std::string& key) {
    std::stringstream ss(output);
    std::string line;
    while (std::getline(ss, line))
        if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
    return {};
}

} // namespace

TEST_CASE("figure1 writes the canonical curves with the dilution identity") {
    const fs::path out = temp_path("fig1.csv");
    const CliResult r = run_cli("figure1 --out " + out.string());
    REQUIRE(r.code == 0);

    std::string header;
    const auto rows = parse_csv(out, &header);
    CHECK(header == "tau_over_t0,g2_nobg,g2_bg05");
    REQUIRE(rows.size() == 601);

    CHECK(std::abs(rows[0][1] - 1.0) < 1e-9);
    CHECK(std::abs(rows[0][2] - 1.0) < 1e-9);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 3);
        CHECK(std::abs((row[2] - 1.0) * 2.25 - (row[1] - 1.0)) < 1e-12);
        if (row[0] > 1.0) CHECK(row[1] == 1.0);
    }
}

TEST_CASE("analytic respects the background column and rejects omega = 0") {
    const fs::path out = temp_path("analytic.csv");
    const CliResult ok = run_cli("analytic --out " + out.string());
    REQUIRE(ok.code == 0);
    std::string header;
    const auto rows = parse_csv(out, &header);
    CHECK(header == "tau_over_t0,g2_atom,F,g2_beam,g2_beam_bg");
    for (const auto& row : rows) CHECK(row[3] == row[4]); // b = 0 in the default config

    const fs::path cfg = write_config("atom.omega = 0\n");
    const CliResult dark = run_cli("analytic --config " + cfg.string() + " --out " +
                                   temp_path("analytic2.csv").string());
    CHECK(dark.code == 4);
}

TEST_CASE("simulate is deterministic per seed and validates duration") {
    const fs::path cfg = write_config("sim.duration = 2000\nsim.seed = 5\n");
    const fs::path out1 = temp_path("run.ts");
    const fs::path out2 = temp_path("run.ts");
    const CliResult r1 = run_cli("simulate --config " + cfg.string() + " --out " + out1.string());
    const CliResult r2 = run_cli("simulate --config " + cfg.string() + " --out " + out2.string());
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(slurp(out1) == slurp(out2)); // identical bytes, identical sha-256

    // summary rate is exactly events/duration
    const double events = std::stod(summary_value(r1.output, "events"));
    const double duration = std::stod(summary_value(r1.output, "duration"));
    const double rate = std::stod(summary_value(r1.output, "rate"));
    CHECK(rate == events / duration);

    const fs::path seeded = temp_path("run.ts");
    const CliResult r3 =
        run_cli("simulate --config " + cfg.string() + " --seed 6 --out " + seeded.string());
    REQUIRE(r3.code == 0);
    CHECK(slurp(out1) != slurp(seeded));

    const fs::path zero = write_config("sim.duration = 0\n");
    CHECK(run_cli("simulate --config " + zero.string() + " --out " +
                  temp_path("zero.ts").string())
              .code == 2);
}

TEST_CASE("simulate-correlate-stats pipeline runs end to end") {
    const fs::path cfg = write_config("sim.duration = 5000\nsim.seed = 11\n");
    const fs::path ts = temp_path("pipe.ts");
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + ts.string()).code == 0);

    const fs::path curve = temp_path("pipe.csv");
    const CliResult corr = run_cli("correlate --in " + ts.string() + " --out " +
                                   curve.string() + " --bin 0.05 --maxlag 2");
    REQUIRE(corr.code == 0);
    std::string header;
    const auto rows = parse_csv(curve, &header);
    CHECK(header == "tau_s,g2,sigma");
    CHECK(rows.size() == 40);

    const CliResult stats =
        run_cli("stats --in " + ts.string() + " --window 1.0");
    REQUIRE(stats.code == 0);
    CHECK(!summary_value(stats.output, "q").empty());
    CHECK(!summary_value(stats.output, "classification").empty());
}

TEST_CASE("stats classifies a synthetic poisson stream as poissonian") {
    beamg2::Rng rng(63);
    beamg2::PhotonStream stream;
    stream.duration = 3000.0;
    double t = rng.exponential(2.0);
    int flip = 0;
    while (t < stream.duration) {
        stream.events.push_back({t, flip ^= 1});
        t += rng.exponential(2.0);
    }
    const fs::path ts = temp_path("poisson.ts");
    beamg2::write_timestamps(ts, stream);

    const CliResult stats = run_cli("stats --in " + ts.string() + " --window 0.5");
    REQUIRE(stats.code == 0);
    CHECK(summary_value(stats.output, "classification") == "poissonian");
}

TEST_CASE("phase command: frozen transverse motion gives zero excursions") {
    const fs::path cfg = write_config("geometry.sigma_vx = 0\nphase.samples = 2000\n");
    const fs::path out = temp_path("phase.csv");
    const CliResult r = run_cli("phase --config " + cfg.string() + " --out " + out.string());
    REQUIRE(r.code == 0);

    std::string header;
    const auto rows = parse_csv(out, &header);
    CHECK(header == "delta_phi_rad,sign_flips");
    REQUIRE(rows.size() == 2000);
    for (const auto& row : rows) {
        CHECK(row[0] == 0.0);
        CHECK(row[1] == 0.0);
    }
    CHECK(summary_value(r.output, "transit_time") == "3.5e-05");
}

TEST_CASE("missing input files exit with the io code") {
    CHECK(run_cli("correlate --in /nonexistent/x.ts --out " +
                  temp_path("x.csv").string())
              .code == 3);
    CHECK(run_cli("stats --in /nonexistent/x.ts").code == 3);
}

TEST_CASE("unknown config keys exit with the config code") {
    const fs::path cfg = write_config("atom.bogus = 1\n");
    CHECK(run_cli("analytic --config " + cfg.string() + " --out " +
                  temp_path("a.csv").string())
              .code == 2);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("correlate").code == 2); // --in/--out required
}
