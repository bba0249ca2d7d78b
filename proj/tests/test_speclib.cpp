#include <doctest.h>

#include <cmath>
#include <limits>

#include "specwb/speclib.hpp"
#include "support.hpp"

using namespace specwb;
using support::Rng;

TEST_SUITE("speclib") {

TEST_CASE("createSpeclib fills fwhm from neighbor differences") {
    const Speclib s = createSpeclib(Matrix::Constant(2, 3, 0.5), {400, 500, 600});
    CHECK(s.fwhm() == std::vector<double>{100, 100, 100});
    CHECK(s.samples() == 2);
    CHECK(s.bands() == 3);
    CHECK(s.ids() == std::vector<std::int64_t>{1, 2});
}

TEST_CASE("fwhm on an irregular grid copies the last difference") {
    CHECK(fwhmFromCenters({400, 410, 430, 470}) == std::vector<double>{10, 20, 40, 40});
    CHECK(fwhmFromCenters({500}) == std::vector<double>{1});
}

TEST_CASE("micrometer centers are converted to nanometers") {
    const Speclib s = createSpeclib(Matrix::Constant(1, 3, 0.1), {0.4, 0.5, 0.6});
    CHECK(s.wavelengths() == std::vector<double>{400, 500, 600});
    CHECK(s.fwhm() == std::vector<double>{100, 100, 100});
}

TEST_CASE("nm to um to nm round trip is exact") {
    Rng rng(7);
    std::vector<double> centers;
    for (int k = 0; k < 4000; ++k) centers.push_back(300 + 0.5 * k);
    for (int k = 0; k < 2000; ++k) centers.push_back(std::round((350 + 0.997 * k) * 1000) / 1000);
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    std::vector<double> um;
    for (double c : centers) um.push_back(c / 1000);
    const Speclib s =
        createSpeclib(Matrix::Zero(1, static_cast<Eigen::Index>(um.size())), um, std::nullopt, {}, WavelengthUnit::Micrometer);
    CHECK(s.wavelengths() == centers);
}

TEST_CASE("createSpeclib rejects malformed grids") {
    CHECK_THROWS_WITH_AS(createSpeclib(Matrix::Zero(1, 3), {500, 400, 600}), doctest::Contains("non-monotone wavelength"),
                         Error);
    CHECK_THROWS_WITH_AS(createSpeclib(Matrix::Zero(1, 3), {400, 500}), doctest::Contains("dimension mismatch"), Error);
    CHECK_THROWS_WITH_AS(createSpeclib(Matrix::Zero(1, 2), {400, std::nan("")}), doctest::Contains("NaN wavelength"),
                         Error);
    CHECK_THROWS_AS(createSpeclib(Matrix(0, 0), {}), Error);
}

TEST_CASE("band count matches grid length for random constructions") {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const int bands = rng.integer(1, 40);
        const int rows = rng.integer(1, 10);
        const Speclib s = support::lib(rng.matrix(rows, bands, 0, 1), support::grid(rng.uniform(300, 500), 2, bands));
        CHECK(s.bands() == s.wavelengths().size());
        CHECK(s.bands() == s.fwhm().size());
    }
}

TEST_CASE("subsetByWavelength keeps bands within inclusive bounds") {
    const Speclib s = support::lib(Matrix::Random(3, 280), support::grid(310, 5, 280));
    const Speclib sub = subsetByWavelength(s, 310, 1000);
    CHECK(sub.wavelengths().back() <= 1000);
    CHECK(sub.bands() == 139);
    CHECK(sub.si() == s.si());
    CHECK(subsetByWavelength(s, 0, std::numeric_limits<double>::infinity()) == s);
    CHECK(subsetByWavelength(s, s.wavelengths().front(), s.wavelengths().back()) == s);
    CHECK_THROWS_AS(subsetByWavelength(support::lib(Matrix::Zero(1, 6), support::grid(400, 100, 6)), 2000, 2100),
                    Error);
}

TEST_CASE("filterBySI selects rows and keeps SI in lockstep") {
    std::vector<double> infected(25, 0);
    for (int k = 0; k < 10; ++k) infected[static_cast<std::size_t>(k * 2)] = 1;
    SiTable si;
    si.set(SiColumn::numeric("infected", infected));
    const Speclib s = support::lib(Matrix::Random(25, 4), {400, 500, 600, 700}, si);
    const Speclib pos = filterBySI(s, "infected", siEquals(1.0));
    CHECK(pos.samples() == 10);
    for (double v : pos.si().column("infected").numbers()) CHECK(v == 1);
    CHECK(pos.ids().front() == 1);
    CHECK(pos.ids()[1] == 3);

    const Speclib neg = filterBySI(s, "infected", [](const SiCell& c) { return std::get<double>(c) != 1; });
    CHECK(pos.samples() + neg.samples() == s.samples());
    CHECK(filterBySI(s, "infected", [](const SiCell&) { return true; }) == s);
    CHECK_THROWS_WITH_AS(filterBySI(s, "foo", siEquals(1.0)), doctest::Contains("foo"), Error);
}

TEST_CASE("SI columns infer numeric and categorical kinds") {
    const SiColumn n = SiColumn::infer("a", {"1", "2.5", "NA", ""});
    CHECK(n.isNumeric());
    CHECK(std::isnan(n.numbers()[2]));
    const SiColumn c = SiColumn::infer("b", {"early", "late", "early"});
    CHECK(c.kind() == SiKind::Categorical);
    CHECK(c.levels() == std::vector<std::string>{"early", "late"});
}

TEST_CASE("maskAndInterpolate interpolates between unmasked neighbors") {
    const Speclib s = support::row({1, 9, 3}, {400, 500, 600});
    const Speclib m = maskAndInterpolate(s, MaskRanges({{450, 550}}));
    CHECK(support::rowOf(m) == std::vector<double>{1, 2, 3});
    CHECK(maskAndInterpolate(s, MaskRanges{}) == s);
    CHECK_THROWS_AS(maskAndInterpolate(s, MaskRanges({{0, 10000}})), Error);
}

TEST_CASE("maskAndInterpolate drops masked edge bands") {
    const Speclib s = support::row({5, 1, 2, 3, 7}, {400, 500, 600, 700, 800});
    const Speclib m = maskAndInterpolate(s, MaskRanges({{350, 450}, {750, 900}}));
    CHECK(m.wavelengths() == std::vector<double>{500, 600, 700});
    CHECK(support::rowOf(m) == std::vector<double>{1, 2, 3});
}

TEST_CASE("maskAndInterpolate is idempotent") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const Speclib s = support::lib(rng.matrix(3, 30, 0, 1), support::grid(400, 10, 30));
        const double lo = rng.uniform(420, 600);
        const MaskRanges mask({{lo, lo + rng.uniform(5, 80)}, {rng.uniform(620, 650), 660}});
        const Speclib once = maskAndInterpolate(s, mask);
        CHECK(maskAndInterpolate(once, mask) == once);
    }
}

TEST_CASE("MaskRanges merge overlapping intervals") {
    const MaskRanges m({{500, 600}, {400, 450}, {590, 700}, {450, 460}});
    CHECK(m.ranges() == std::vector<MaskRange>{{400, 460}, {500, 700}});
    CHECK(m.contains(400));
    CHECK_FALSE(m.contains(460));
}

TEST_CASE("spadToChlorophyll") {
    CHECK(spadToChlorophyll(0) == 0);
    CHECK(spadToChlorophyll(50) == doctest::Approx(117.1 * 50 / 98.84).epsilon(1e-15));
    CHECK(std::abs(spadToChlorophyll(50) - 59.237150951031) < 1e-9);
    CHECK_THROWS_AS(spadToChlorophyll(148.84), Error);
    CHECK_THROWS_AS(spadToChlorophyll(200), Error);
}

TEST_CASE("nearestBand resolves ties to the lower wavelength") {
    const Speclib s = support::row({1, 2, 3}, {400, 500, 600});
    CHECK(s.nearestBand(450) == 0);
    CHECK(s.nearestBand(451) == 1);
    CHECK(s.nearestBand(10000) == 2);
}

TEST_CASE("selectRows keeps stable identifiers") {
    const Speclib s = support::lib(Matrix::Random(5, 3), {400, 500, 600});
    const Speclib sub = s.selectRows({4, 1});
    CHECK(sub.ids() == std::vector<std::int64_t>{5, 2});
    CHECK(sub.spectra().row(0) == s.spectra().row(4));
}

}  // TEST_SUITE
