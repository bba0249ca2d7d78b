#include <doctest.h>

#include <cmath>

#include "specwb/preprocess.hpp"
#include "support.hpp"

using namespace specwb;
using support::Rng;

namespace {

const std::vector<FilterSpec> kAllFilters = {
    {FilterMethod::SavitzkyGolay, 7, 2, 0.1},
    {FilterMethod::SavitzkyGolay, 15, 4, 0.1},
    {FilterMethod::Mean, 5, 3, 0.1},
    {FilterMethod::Lowess, 15, 3, 0.2},
    {FilterMethod::Spline, 9, 3, 0.1},
};

double maxAbs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("Savitzky-Golay center coefficients for window 5, order 2") {
    const auto c = savitzkyGolayCoefficients(5, 2, 0);
    const std::vector<double> expected = {-3 / 35.0, 12 / 35.0, 17 / 35.0, 12 / 35.0, -3 / 35.0};
    REQUIRE(c.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(c[k] == doctest::Approx(expected[k]).epsilon(1e-14));
}

TEST_CASE("constants are fixed points of every filter") {
    const Speclib s = support::lib(Matrix::Constant(3, 40, 0.37), support::grid(400, 5, 40));
    for (const auto& spec : kAllFilters) {
        const Speclib f = noiseFilter(s, spec);
        CHECK(maxAbs(f.spectra().array() - 0.37) < 1e-12);
        CHECK(f.grid() == s.grid());
    }
}

TEST_CASE("Savitzky-Golay reproduces polynomials up to its order") {
    const auto wl = support::grid(400, 2, 60);
    for (int order = 2; order <= 4; ++order) {
        for (int window = 7; window <= 15; window += 2) {
            if (order >= window) continue;
            Matrix m(1, 60);
            for (int k = 0; k < 60; ++k) {
                const double x = (wl[static_cast<std::size_t>(k)] - 460) / 60;
                double v = 0.3, p = 1;
                for (int d = 1; d <= order; ++d) v += (d % 2 ? 0.2 : -0.15) * (p *= x);
                m(0, k) = v;
            }
            const Speclib f = noiseFilter(support::lib(m, wl), {FilterMethod::SavitzkyGolay, window, order, 0.1});
            CHECK(maxAbs(f.spectra() - m) <= 1e-9);
        }
    }
}

TEST_CASE("mean filter with symmetric edge padding") {
    const Speclib f = noiseFilter(support::row({0, 3, 0, 3, 0}, support::grid(400, 10, 5)), {FilterMethod::Mean, 3, 0, 0.1});
    const auto v = support::rowOf(f);
    const std::vector<double> expected = {1, 1, 2, 1, 1};
    for (std::size_t k = 0; k < 5; ++k) CHECK(v[k] == doctest::Approx(expected[k]).epsilon(1e-15));
}

TEST_CASE("filters are linear") {
    Rng rng(3);
    const auto wl = support::grid(400, 3, 50);
    for (const auto& spec : kAllFilters) {
        for (int t = 0; t < 10; ++t) {
            const Matrix x = rng.matrix(2, 50, 0, 1), y = rng.matrix(2, 50, 0, 1);
            const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
            const Matrix lhs = noiseFilter(support::lib(a * x + b * y, wl), spec).spectra();
            const Matrix rhs = a * noiseFilter(support::lib(x, wl), spec).spectra() +
                               b * noiseFilter(support::lib(y, wl), spec).spectra();
            CHECK(maxAbs(lhs - rhs) <= 1e-12);
        }
    }
}

TEST_CASE("filters reduce white noise") {
    Rng rng(4);
    const auto wl = support::grid(400, 2, 200);
    Matrix clean(1, 200), noisy(1, 200);
    for (int k = 0; k < 200; ++k) {
        clean(0, k) = 0.3 + 0.2 * std::sin(k / 25.0);
        noisy(0, k) = clean(0, k) + rng.normal(0, 0.02);
    }
    for (const auto& spec : kAllFilters) {
        const Matrix f = noiseFilter(support::lib(noisy, wl), spec).spectra();
        CHECK((f - clean).norm() < (noisy - clean).norm());
    }
}

TEST_CASE("filter parameter validation") {
    const Speclib s = support::lib(Matrix::Zero(1, 10), support::grid(400, 10, 10));
    CHECK_THROWS_WITH_AS(noiseFilter(s, {FilterMethod::Mean, 11, 0, 0.1}), doctest::Contains("exceeds band count"), Error);
    CHECK_THROWS_WITH_AS(noiseFilter(s, {FilterMethod::Mean, 4, 0, 0.1}), doctest::Contains("odd"), Error);
    CHECK_THROWS_AS(noiseFilter(s, {FilterMethod::SavitzkyGolay, 5, 5, 0.1}), Error);
    CHECK_THROWS_AS(noiseFilter(s, {FilterMethod::Lowess, 5, 0, 0}), Error);
    CHECK(parseFilterMethod("sgolay") == FilterMethod::SavitzkyGolay);
    CHECK_THROWS_AS(parseFilterMethod("median"), Error);
}

TEST_CASE("derivative of a linear spectrum is its slope") {
    std::vector<double> wl = {400, 403, 410, 412, 420, 431, 440};
    std::vector<double> v;
    for (double w : wl) v.push_back(0.1 + 0.002 * w);
    const Speclib d = derivative(support::row(v, wl), 1);
    for (double x : support::rowOf(d)) CHECK(x == doctest::Approx(0.002).epsilon(1e-9));
}

TEST_CASE("derivative of a constant is zero") {
    const Speclib s = support::lib(Matrix::Constant(2, 12, 0.42), support::grid(400, 5, 12));
    CHECK(maxAbs(derivative(s, 1).spectra()) == 0);
    CHECK(maxAbs(derivative(s, 2).spectra()) == 0);
}

TEST_CASE("second derivative of a quadratic is 2a in the interior") {
    const double a = 3e-6;
    const auto wl = support::grid(400, 4, 30);
    std::vector<double> v;
    for (double w : wl) v.push_back(a * w * w);
    const auto d2 = support::rowOf(derivative(support::row(v, wl), 2));
    for (std::size_t k = 1; k + 1 < d2.size(); ++k) CHECK(d2[k] == doctest::Approx(2 * a).epsilon(1e-6));
}

TEST_CASE("derivative commutes with scaling") {
    Rng rng(8);
    const auto wl = support::grid(400, 5, 25);
    const Matrix m = rng.matrix(3, 25, 0, 1);
    for (int order : {1, 2}) {
        const Matrix a = derivative(support::lib(2.5 * m, wl), order).spectra();
        const Matrix b = 2.5 * derivative(support::lib(m, wl), order).spectra();
        CHECK(maxAbs(a - b) <= 1e-12 * std::max(1.0, maxAbs(b)));
    }
}

TEST_CASE("derivative needs order + 1 bands") {
    CHECK_THROWS_AS(derivative(support::row({1, 2}, {400, 500}), 2), Error);
    CHECK_THROWS_AS(derivative(support::row({1}, {400}), 1), Error);
}

TEST_CASE("fwhm to sigma") {
    CHECK(std::abs(fwhmToSigma(10) - 4.24661) <= 1e-5);
    CHECK(fwhmToSigma(10) == doctest::Approx(10 / (2 * std::sqrt(2 * std::log(2.0)))).epsilon(1e-15));
}

TEST_CASE("resampling a constant spectrum") {
    const Speclib s = support::lib(Matrix::Constant(2, 601, 0.5), support::grid(400, 1, 601));
    const Speclib r = spectralResample(s, {{450, 30}, {560, 20}, {660, 40}, {835, 120}});
    CHECK(maxAbs(r.spectra().array() - 0.5) <= 1e-12);
    CHECK(r.wavelengths() == std::vector<double>{450, 560, 660, 835});
    CHECK(r.fwhm() == std::vector<double>{30, 20, 40, 120});
}

TEST_CASE("a very narrow band samples the nearest source band") {
    Rng rng(12);
    const Speclib s = support::lib(rng.matrix(1, 201, 0, 1), support::grid(400, 1, 201));
    const Speclib r = spectralResample(s, {{500, 0.1}});
    CHECK(r.spectra()(0, 0) == doctest::Approx(s.spectra()(0, 100)).epsilon(1e-12));
}

TEST_CASE("resampling is affine invariant and a convex combination") {
    Rng rng(13);
    const auto wl = support::grid(400, 2, 150);
    const std::vector<SensorBandSpec> target = {{420, 15}, {500, 40}, {611, 25}, {690, 8}};
    for (int t = 0; t < 20; ++t) {
        const Matrix m = rng.matrix(2, 150, 0, 1);
        const double a = rng.uniform(0.1, 3), b = rng.uniform(-1, 1);
        const Matrix lhs = spectralResample(support::lib((a * m.array() + b).matrix(), wl), target).spectra();
        const Matrix base = spectralResample(support::lib(m, wl), target).spectra();
        CHECK(maxAbs(lhs - ((a * base.array() + b).matrix())) <= 1e-12);
        CHECK(base.maxCoeff() <= m.maxCoeff());
        CHECK(base.minCoeff() >= m.minCoeff());
    }
}

TEST_CASE("resampling without source support is an error") {
    const Speclib s = support::lib(Matrix::Zero(1, 10), support::grid(400, 10, 10));
    CHECK_THROWS_WITH_AS(spectralResample(s, {{900, 10}}), doctest::Contains("no source band"), Error);
}

TEST_CASE("response-curve resampling") {
    Rng rng(14);
    const auto wl = support::grid(400, 10, 31);
    const Speclib s = support::lib(rng.matrix(3, 31, 0, 1), wl);
    Matrix curves = Matrix::Zero(2, 31);
    curves(0, 10) = 1;                           // a single band at 500 nm
    curves.row(1).segment(20, 3) << 1, 2, 1;      // triangle around 610 nm
    const Speclib response = support::lib(curves, wl);
    const Speclib r = spectralResample(s, response);
    CHECK(r.wavelengths()[0] == doctest::Approx(500));
    CHECK(r.wavelengths()[1] == doctest::Approx(610));
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(r.spectra()(i, 0) == doctest::Approx(s.spectra()(i, 10)));
        CHECK(r.spectra()(i, 1) ==
              doctest::Approx((s.spectra()(i, 20) + 2 * s.spectra()(i, 21) + s.spectra()(i, 22)) / 4));
    }
}

}  // TEST_SUITE
