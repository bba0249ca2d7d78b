#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "specwb/io.hpp"
#include "support.hpp"

using namespace specwb;
using support::Rng;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result runCli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Speclib sampleLibrary(int rows, int bands) {
    Rng rng(61);
    Matrix m(rows, bands);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < bands; ++k) m(i, k) = 0.3 + 0.2 * std::sin(k / 7.0 + i) + rng.uniform(0, 0.02);
    return support::lib(m, support::grid(600, 4, bands));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    support::TempDir dir;
    std::ofstream(dir / "empty.csv").close();
    const auto empty = runCli({"info", (dir / "empty.csv").string()});
    CHECK(empty.code == 2);
    CHECK_FALSE(empty.err.empty());
    CHECK(runCli({"frobnicate"}).code == 1);
    CHECK(runCli({}).code == 1);
    CHECK(runCli({"info", "--bogus", "x.csv"}).code == 1);
    CHECK(runCli({"info", (dir / "absent.csv").string()}).code == 2);
    const auto help = runCli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("transform") != std::string::npos);
}

TEST_CASE("info and transform") {
    support::TempDir dir;
    writeCsvSpeclib(sampleLibrary(4, 50), dir / "in.csv");
    const auto info = runCli({"info", (dir / "in.csv").string()});
    REQUIRE(info.code == 0);
    CHECK(info.out.find("samples: 4") != std::string::npos);

    const auto t = runCli({"transform", "--method", "sh", "--out", "bd", (dir / "in.csv").string(), (dir / "bd.csv").string()});
    REQUIRE(t.code == 0);
    const Speclib bd = readCsvSpeclib(dir / "bd.csv");
    CHECK(bd.bands() == 50);
    CHECK(bd.spectra().minCoeff() >= 0);
    CHECK(bd.spectra().maxCoeff() <= 1);
}

TEST_CASE("index expressions print one value per spectrum") {
    support::TempDir dir;
    writeCsvSpeclib(support::lib((Matrix(2, 2) << 0.1, 0.5, 0.2, 0.2).finished(), {680, 800}), dir / "in.csv");
    const auto r = runCli({"index", "--expr", "R800/R680", (dir / "in.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out == "id,value\n1,5\n2,1\n");
    CHECK(runCli({"index", "--expr", "R800+", (dir / "in.csv").string()}).code == 2);
}

TEST_CASE("chunked pipeline equals the monolithic pipeline") {
    support::TempDir dir;
    const Speclib s = sampleLibrary(40, 60);
    writeCsvSpeclib(s, dir / "in.csv");
    REQUIRE(runCli({"convert", "--samples", "5", (dir / "in.csv").string(), (dir / "cube.dat").string()}).code == 0);

    REQUIRE(runCli({"filter", "--method", "sgolay", "--window", "7", "--order", "2", (dir / "in.csv").string(),
                    (dir / "f.csv").string()})
                .code == 0);
    REQUIRE(runCli({"deriv", "--order", "1", (dir / "f.csv").string(), (dir / "d.csv").string()}).code == 0);
    const Speclib mono = readCsvSpeclib(dir / "d.csv");

    for (std::string threads : {"1", "3"}) {
        const auto r = runCli({"chunked", "--kernel", "filter --method sgolay --window 7 --order 2", "--kernel",
                               "deriv --order 1", "--chunk-bytes", "4800", "--threads", threads,
                               (dir / "cube.dat").string(), (dir / ("out" + threads + ".dat")).string()});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("chunks: 4") != std::string::npos);
        CHECK(r.out.find("peak chunks in memory: 2") != std::string::npos);
        const Speclib chunked =
            readEnviCube(dir / ("out" + threads + ".dat"), enviHeaderPathFor(dir / ("out" + threads + ".dat")));
        CHECK(chunked.spectra() == mono.spectra());
        CHECK(chunked.wavelengths() == mono.wavelengths());
    }
    CHECK(slurp(dir / "out1.dat") == slurp(dir / "out3.dat"));
    CHECK(runCli({"chunked", "--kernel", "filter --window 4", (dir / "cube.dat").string(), (dir / "bad.dat").string()})
              .code != 0);
    CHECK_FALSE(std::filesystem::exists(dir / "bad.hdr"));
}

TEST_CASE("outputs are deterministic across runs and thread counts") {
    support::TempDir dir;
    SiTable si;
    std::vector<double> status;
    for (int i = 0; i < 30; ++i) status.push_back(i % 2);
    si.set(SiColumn::numeric("status", status));
    Speclib s = sampleLibrary(30, 12);
    s = support::lib(s.spectra(), s.wavelengths(), si);
    writeCsvSpeclib(s, dir / "in.csv");

    std::vector<std::string> outputs;
    for (std::string threads : {"1", "4", "1"}) {
        const auto path = dir / ("glm" + threads + ".csv");
        REQUIRE(runCli({"glm", "--response", "status", "--threads", threads, (dir / "in.csv").string(), path.string()})
                    .code == 0);
        outputs.push_back(slurp(path));
    }
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);

    ::setenv("SPECWB_THREADS", "3", 1);
    REQUIRE(runCli({"glm", "--response", "status", (dir / "in.csv").string(), (dir / "env.csv").string()}).code == 0);
    ::unsetenv("SPECWB_THREADS");
    CHECK(slurp(dir / "env.csv") == outputs[0]);

    const auto a = runCli({"transform", (dir / "in.csv").string()});
    const auto b = runCli({"transform", (dir / "in.csv").string()});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

}  // TEST_SUITE
