#include <doctest.h>

#include <cmath>
#include <functional>

#include "specwb/indices.hpp"
#include "support.hpp"

using namespace specwb;
using support::Rng;

namespace {

IndexNodePtr randomTree(Rng& rng, int depth) {
    if (depth == 0 || rng.uniform(0, 1) < 0.25) {
        switch (rng.integer(0, 3)) {
            case 0: return std::make_shared<IndexNode>(IndexNode{NumberNode{static_cast<double>(rng.integer(0, 20))}});
            case 1: return std::make_shared<IndexNode>(IndexNode{NumberNode{rng.uniform(0, 3)}});
            default: {
                const BandSource src = rng.integer(0, 4) == 0 ? BandSource::FirstDerivative : BandSource::Reflectance;
                return std::make_shared<IndexNode>(IndexNode{BandNode{src, static_cast<double>(rng.integer(400, 2400))}});
            }
        }
    }
    const char ops[] = {'+', '-', '*', '/', '^'};
    return std::make_shared<IndexNode>(
        IndexNode{BinaryNode{ops[rng.integer(0, 4)], randomTree(rng, depth - 1), randomTree(rng, depth - 1)}});
}

Speclib vegetation() {
    const auto wl = support::grid(400, 1, 2101);
    Matrix m(1, 2101);
    for (Eigen::Index k = 0; k < 2101; ++k) m(0, k) = 0.05 + 0.45 / (1 + std::exp(-(wl[static_cast<std::size_t>(k)] - 715) / 10));
    return support::lib(m, wl);
}

}  // namespace

TEST_SUITE("indices") {

TEST_CASE("parse a normalized difference") {
    const IndexExpr e = parseIndex("(R800-R680)/(R800+R680)");
    CHECK(e.toString() == "(R800-R680)/(R800+R680)");
    const auto bands = e.bands();
    REQUIRE(bands.size() == 4);
    CHECK(bands[0].wavelength == 800);
    CHECK(bands[1].wavelength == 680);
    CHECK(parseIndex(" R800 / R680 ").toString() == "R800/R680");
    CHECK(parseIndex("D1715/D2705").bands()[1].source == BandSource::SecondDerivative);
    CHECK(parseIndex("2^3^2").toString() == "2^3^2");
    CHECK(parseIndex("(2^3)^2").toString() == "(2^3)^2");
    CHECK(parseIndex("1-(2-3)").toString() == "1-(2-3)");
    CHECK(parseIndex("(1-2)-3").toString() == "1-2-3");
}

TEST_CASE("syntax errors carry a position") {
    try {
        parseIndex("R800+");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.position() == 6);
    }
    try {
        parseIndex("R800 # R680");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.position() == 6);
        CHECK(std::string(e.what()).find("unknown token") != std::string::npos);
    }
    CHECK_THROWS_AS(parseIndex("(R800"), SyntaxError);
    CHECK_THROWS_AS(parseIndex("R"), SyntaxError);
    CHECK_THROWS_AS(parseIndex("D3700"), SyntaxError);
    CHECK_THROWS_AS(parseIndex("R800 R680"), SyntaxError);
}

TEST_CASE("printing and parsing round trip") {
    Rng rng(31);
    for (int t = 0; t < 500; ++t) {
        const IndexExpr e(randomTree(rng, rng.integer(0, 5)));
        const std::string text = e.toString();
        CHECK_MESSAGE(parseIndex(text) == e, text);
        CHECK(parseIndex(text).toString() == text);
    }
}

TEST_CASE("index arithmetic") {
    const Speclib s = support::row({0.1, 0.5}, {680, 800});
    CHECK(std::abs(evalIndex(parseIndex("(R800-R680)/(R800+R680)"), s).values[0] - 0.4 / 0.6) <= 1e-12);
    CHECK(evalIndex(parseIndex("R680/R680"), s).values[0] == 1);
    CHECK(std::abs(vegindex(s, "NDVI").values[0] - 0.4 / 0.6) <= 1e-12);
    CHECK_THROWS_WITH_AS(evalIndex(parseIndex("R1200"), s), doctest::Contains("1200"), Error);

    const Speclib flat = support::lib(Matrix::Constant(2, 3, 0.3), {2000, 2100, 2200});
    for (double v : vegindex(flat, "CAI").values) CHECK(std::abs(v) <= 1e-12);
    CHECK_THROWS_WITH_AS(vegindex(flat, "NOPE"), doctest::Contains("NDVI"), Error);
    CHECK(soilindex(flat, "CAI").values == vegindex(flat, "CAI").values);
}

TEST_CASE("ratio indices are scale invariant and NDVI is bounded") {
    Rng rng(32);
    const auto wl = support::grid(400, 5, 121);
    const Matrix m = rng.matrix(200, 121, 0.01, 1);
    const Speclib s = support::lib(m, wl), scaled = support::lib(3.7 * m, wl);
    for (const char* name : {"NDVI", "SR", "PRI", "GMI1", "mSR705"}) {
        const auto a = vegindex(s, name).values, b = vegindex(scaled, name).values;
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::abs(a[i])));
    }
    for (double v : vegindex(s, "NDVI").values) CHECK((v >= -1 && v <= 1));
}

TEST_CASE("band references use the nearest band") {
    const auto wl = support::grid(400, 1, 501);
    Matrix m(1, 501);
    for (Eigen::Index k = 0; k < 501; ++k) m(0, k) = k;
    const Speclib s = support::lib(m, wl);
    CHECK(evalIndex(parseIndex("R650.4"), s).values[0] == 250);
    CHECK(evalIndex(parseIndex("R650.6"), s).values[0] == 251);
}

TEST_CASE("division by zero is counted and yields NaN") {
    const Speclib s = support::lib((Matrix(3, 2) << 0.1, 0.5, 0, 0, 0.2, 0.2).finished(), {680, 800});
    const auto r = evalIndex(parseIndex("R800/R680"), s);
    CHECK(r.division_by_zero == 1);
    CHECK(std::isnan(r.values[1]));
    CHECK(r.values[2] == 1);
}

TEST_CASE("linear interpolation red edge of a logistic edge") {
    const Speclib s = vegetation();
    const auto r = redEdge(s, RedEdgeMethod::LinearInterpolation);
    REQUIRE(r[0].ok());
    CHECK(std::abs(r[0].reip - 715) <= 5);
    CHECK(r[0].in_expected_range);
}

TEST_CASE("Gaussian fit recovers an inverted Gaussian edge") {
    const auto wl = support::grid(600, 2, 151);
    std::vector<double> v;
    for (double w : wl) v.push_back(0.5 - (0.5 - 0.04) * std::exp(-(w - 690) * (w - 690) / (2 * 25.0 * 25.0)));
    const auto r = redEdgeSpectrum(wl, v, RedEdgeMethod::GaussianFit);
    CHECK(std::abs(r.reip - 715) <= 0.5);
    CHECK(r.auxiliary.at("sigma") == doctest::Approx(25).epsilon(1e-6));
    const auto le = redEdgeSpectrum(wl, v, RedEdgeMethod::LinearExtrapolation);
    CHECK(std::isfinite(le.reip));
}

TEST_CASE("a flat spectrum has no red edge") {
    const auto wl = support::grid(600, 2, 151);
    const std::vector<double> v(wl.size(), 0.3);
    for (auto m : {RedEdgeMethod::LinearInterpolation, RedEdgeMethod::GaussianFit, RedEdgeMethod::LinearExtrapolation})
        CHECK_THROWS_WITH_AS(redEdgeSpectrum(wl, v, m), doctest::Contains("no red edge"), Error);
    const auto batch = redEdge(support::row(v, wl), RedEdgeMethod::LinearInterpolation);
    CHECK_FALSE(batch[0].ok());
    CHECK(std::isnan(batch[0].reip));
}

TEST_CASE("linear interpolation red edge is affine invariant") {
    Rng rng(33);
    const Speclib s = vegetation();
    const double base = redEdge(s, RedEdgeMethod::LinearInterpolation)[0].reip;
    for (int t = 0; t < 20; ++t) {
        const double a = rng.uniform(0.2, 5), b = rng.uniform(-0.5, 0.5);
        const Speclib t2 = support::lib((a * s.spectra().array() + b).matrix(), s.wavelengths());
        CHECK(redEdge(t2, RedEdgeMethod::LinearInterpolation)[0].reip == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("red edge needs 660-800 nm coverage") {
    const Speclib s = support::lib(Matrix::Constant(1, 50, 0.3), support::grid(400, 5, 50));
    CHECK_THROWS_WITH_AS(redEdge(s, RedEdgeMethod::LinearInterpolation), doctest::Contains("missing coverage"), Error);
    CHECK(parseRedEdgeMethod("LE") == RedEdgeMethod::LinearExtrapolation);
    CHECK_THROWS_AS(parseRedEdgeMethod("spline"), Error);
}

}  // TEST_SUITE
