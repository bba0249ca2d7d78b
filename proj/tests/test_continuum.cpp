#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "specwb/continuum.hpp"
#include "support.hpp"

using namespace specwb;
using support::Rng;

namespace {

// Brute force: a point is a hull vertex unless it lies strictly below the
// chord of some pair around it.
std::vector<std::size_t> bruteHullVertices(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
        bool below = false;
        for (std::size_t i = 0; i < k && !below; ++i)
            for (std::size_t j = k + 1; j < n && !below; ++j) {
                const double cross = (x[k] - x[i]) * (y[j] - y[i]) - (y[k] - y[i]) * (x[j] - x[i]);
                below = cross > 0;
            }
        if (!below) out.push_back(k);
    }
    return out;
}

std::vector<double> interpolate(const std::vector<double>& x, const std::vector<double>& y,
                                const std::vector<std::size_t>& vertices) {
    std::vector<double> cv(x.size());
    for (std::size_t v = 0; v + 1 < vertices.size(); ++v) {
        const std::size_t a = vertices[v], b = vertices[v + 1];
        for (std::size_t k = a + 1; k < b; ++k) cv[k] = y[a] + (y[b] - y[a]) * (x[k] - x[a]) / (x[b] - x[a]);
    }
    for (auto v : vertices) cv[v] = y[v];
    return cv;
}

// Largest chord value over any pair bracketing each band.
std::vector<double> maxChord(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> out = y;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            for (std::size_t k = i; k <= j; ++k)
                out[k] = std::max(out[k], y[i] + (y[j] - y[i]) * (x[k] - x[i]) / (x[j] - x[i]));
    return out;
}

std::vector<double> randomGrid(Rng& rng, int n) {
    std::vector<double> x{rng.uniform(400, 500)};
    for (int k = 1; k < n; ++k) x.push_back(x.back() + rng.uniform(1, 20));
    return x;
}

}  // namespace

TEST_SUITE("continuum") {

TEST_CASE("convex hull of a three-point dip") {
    const std::vector<double> x = {400, 500, 600}, y = {0.2, 0.1, 0.4};
    const auto h = convexHull(x, y);
    CHECK(h.fixpoints == std::vector<std::size_t>{0, 2});
    REQUIRE(h.cv.size() == 3);
    CHECK(h.cv[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(h.cv[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(h.cv[2] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("segmented hull follows the slope-sign rule") {
    const std::vector<double> x = {400, 500, 600, 700, 800}, y = {0.1, 0.3, 0.2, 0.5, 0.1};
    const auto h = segmentedUpperHull(x, y);
    const std::vector<double> expected = {0.1, 0.3, 0.4, 0.5, 0.1};
    for (std::size_t k = 0; k < 5; ++k) CHECK(h.cv[k] == doctest::Approx(expected[k]).epsilon(1e-15));
    CHECK(h.fixpoints == std::vector<std::size_t>{0, 1, 3, 4});
}

TEST_CASE("concave, constant and monotone spectra are their own hull") {
    const std::vector<double> x = {400, 450, 500, 550, 600};
    for (const std::vector<double>& y : {std::vector<double>{0.1, 0.3, 0.4, 0.3, 0.1},
                                         std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2},
                                         std::vector<double>{0.125, 0.25, 0.375, 0.5, 0.625}}) {
        const auto h = convexHull(x, y);
        CHECK(h.fixpoints.size() == 5);
        CHECK(h.cv == y);
    }
}

TEST_CASE("hulls need three bands") {
    const std::vector<double> x = {400, 500}, y = {0.1, 0.2};
    CHECK_THROWS_AS(convexHull(x, y), Error);
    CHECK_THROWS_AS(segmentedUpperHull(x, y), Error);
    CHECK(parseHullMethod("sh") == HullMethod::SegmentedHull);
    CHECK_THROWS_AS(parseHullMethod("hull"), Error);
}

TEST_CASE("convex hull matches a brute-force oracle") {
    Rng rng(21);
    for (int t = 0; t < 500; ++t) {
        const int n = rng.integer(3, 40);
        const bool integral = t % 3 == 0;
        std::vector<double> x, y;
        for (int k = 0; k < n; ++k) {
            x.push_back(integral ? 400 + 10 * k : 0);
            y.push_back(integral ? rng.integer(0, 3) : rng.uniform(0, 1));
        }
        if (!integral) x = randomGrid(rng, n);
        const auto h = convexHull(x, y);
        const auto vertices = bruteHullVertices(x, y);
        CHECK(h.fixpoints == vertices);
        CHECK(h.cv == interpolate(x, y, vertices));
        const auto chord = maxChord(x, y);
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(h.cv[k] - chord[k]) <= 1e-12);
    }
}

TEST_CASE("continuum lies above the spectrum and band depth is scale invariant") {
    Rng rng(22);
    const auto wl = support::grid(400, 4, 80);
    Matrix m(1000, 80);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double a = rng.uniform(0.1, 0.6), f = rng.uniform(5, 40);
        for (Eigen::Index k = 0; k < 80; ++k)
            m(i, k) = std::max(0.0, a + 0.1 * std::sin(k / f) + rng.normal(0, 0.02));
    }
    const Speclib s = support::lib(m, wl);
    for (HullMethod method : {HullMethod::ConvexHull, HullMethod::SegmentedHull}) {
        const Matrix cv = transformSpeclib(s, method, TransformOut::Raw).spectra.spectra();
        const Matrix bd = transformSpeclib(s, method, TransformOut::BandDepth).spectra.spectra();
        bool above = true, bounded = true, invariant = true;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            above = above && cv.data()[i] >= m.data()[i] - 1e-12 * std::abs(m.data()[i]);
            bounded = bounded && bd.data()[i] >= 0 && bd.data()[i] <= 1;
        }
        for (double c : {0.5, 2.0, 10.0}) {
            const Matrix scaled = transformSpeclib(support::lib(c * m, wl), method, TransformOut::BandDepth).spectra.spectra();
            invariant = invariant && (scaled - bd).cwiseAbs().maxCoeff() <= 1e-12;
        }
        CHECK(above);
        CHECK(bounded);
        CHECK(invariant);
    }
}

TEST_CASE("segmented hull slopes and zero depth at fixpoints") {
    Rng rng(23);
    for (int t = 0; t < 300; ++t) {
        const int n = rng.integer(3, 50);
        const auto x = randomGrid(rng, n);
        std::vector<double> y;
        for (int k = 0; k < n; ++k) y.push_back(rng.uniform(0.05, 1));
        const auto h = segmentedUpperHull(x, y);
        const std::size_t peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
        for (std::size_t k = 0; k + 1 < h.cv.size(); ++k) {
            if (k + 1 <= peak) CHECK(h.cv[k + 1] >= h.cv[k]);
            if (k >= peak) CHECK(h.cv[k + 1] <= h.cv[k]);
        }
        for (std::size_t k = 0; k < y.size(); ++k) CHECK(h.cv[k] >= y[k] - 1e-12);
        for (auto f : h.fixpoints) CHECK(h.cv[f] == y[f]);

        const auto bd = transformSpeclib(support::row(y, x), HullMethod::SegmentedHull, TransformOut::BandDepth);
        for (auto f : h.fixpoints) CHECK(bd.spectra.spectra()(0, static_cast<Eigen::Index>(f)) == 0);
    }
}

TEST_CASE("transform special cases") {
    const auto wl = support::grid(400, 50, 3);
    const Speclib flat = support::row({0.4, 0.4, 0.4}, wl);
    CHECK(support::rowOf(transformSpeclib(flat, HullMethod::ConvexHull, TransformOut::BandDepth).spectra) ==
          std::vector<double>{0, 0, 0});
    CHECK(support::rowOf(transformSpeclib(flat, HullMethod::ConvexHull, TransformOut::Ratio).spectra) ==
          std::vector<double>{1, 1, 1});

    const auto bd = support::rowOf(
        transformSpeclib(support::row({0.3, 0.1, 0.3}, wl), HullMethod::SegmentedHull, TransformOut::BandDepth).spectra);
    CHECK(bd[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));

    const auto zero = transformSpeclib(support::row({0, 0, 0}, wl), HullMethod::ConvexHull, TransformOut::BandDepth);
    CHECK(zero.degenerate_bands == 3);
    CHECK(support::rowOf(zero.spectra) == std::vector<double>{0, 0, 0});
}

TEST_CASE("transform does not depend on thread count") {
    Rng rng(24);
    const Speclib s = support::lib(rng.matrix(57, 30, 0, 1), support::grid(400, 5, 30));
    const auto one = transformSpeclib(s, HullMethod::SegmentedHull, TransformOut::BandDepth, 1);
    const auto many = transformSpeclib(s, HullMethod::SegmentedHull, TransformOut::BandDepth, 4);
    CHECK(one.spectra == many.spectra);
}

TEST_CASE("specfeat isolates the run around the anchor") {
    const BandDepthSpeclib bd(support::row({0, 0.2, 0.5, 0, 0.1, 0}, support::grid(400, 100, 6)));
    const auto f = specfeat(bd, {600, 800, 550, 400});
    REQUIRE(f.size() == 1);
    REQUIRE(f[0].size() == 4);
    CHECK_FALSE(f[0][0].empty);
    CHECK(f[0][0].first_band == 0);
    CHECK(f[0][0].last_band == 3);
    CHECK(f[0][0].depth == std::vector<double>{0, 0.2, 0.5, 0});
    CHECK(f[0][0].lowerBound() == 400);
    CHECK(f[0][0].upperBound() == 700);
    CHECK(f[0][1].first_band == 3);
    CHECK(f[0][1].last_band == 5);
    CHECK(f[0][2].duplicate);
    CHECK(f[0][3].empty);
    CHECK_THROWS_WITH_AS(specfeat(bd, {300}), doctest::Contains("outside the grid"), Error);
}

TEST_CASE("features from real band depth are bounded by zeros and disjoint") {
    Rng rng(25);
    const auto wl = support::grid(400, 5, 60);
    Matrix m(500, 60);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < 60; ++k) m(i, k) = 0.4 + 0.1 * std::sin(k / rng.uniform(2, 8)) + rng.uniform(0, 0.05);
    const BandDepthSpeclib bd(transformSpeclib(support::lib(m, wl), HullMethod::SegmentedHull, TransformOut::BandDepth));
    std::vector<double> anchors;
    for (int a = 0; a < 8; ++a) anchors.push_back(rng.uniform(400, 695));
    const auto all = specfeat(bd, anchors);
    for (const auto& features : all) {
        std::set<std::size_t> used;
        for (const auto& f : features) {
            if (f.empty || f.duplicate) continue;
            CHECK(f.depth.front() <= kFeatureEpsilon);
            CHECK(f.depth.back() <= kFeatureEpsilon);
            for (std::size_t k = 1; k + 1 < f.depth.size(); ++k) {
                CHECK(f.depth[k] > kFeatureEpsilon);
                CHECK(used.insert(f.first_band + k).second);
            }
        }
    }
}

TEST_CASE("feature properties of a triangle") {
    AbsorptionFeature f;
    f.empty = false;
    f.wavelengths = {400, 500, 600, 700};
    f.depth = {0, 0.2, 0.5, 0};
    const auto p = featureProperties(f);
    CHECK(p.area == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p.max_depth == 0.5);
    CHECK(p.wavelength_max == 600);
    CHECK(p.half_max_lower == doctest::Approx(500 + 100.0 / 6).epsilon(1e-12));
    CHECK(p.half_max_upper == doctest::Approx(650).epsilon(1e-12));
    CHECK(p.half_max_width == doctest::Approx(400.0 / 3).epsilon(1e-12));
    AbsorptionFeature empty;
    CHECK_THROWS_AS(featureProperties(empty), Error);
}

TEST_CASE("Gaussian features fit their reference Gaussian") {
    for (auto [left, right] : {std::pair{30.0, 30.0}, std::pair{20.0, 45.0}, std::pair{12.0, 8.0}}) {
        AbsorptionFeature f;
        f.empty = false;
        for (double w = 500; w <= 800; w += 5) {
            const double s = w < 650 ? left : right;
            f.wavelengths.push_back(w);
            f.depth.push_back(0.6 * std::exp(-(w - 650) * (w - 650) / (2 * s * s)));
        }
        const auto p = featureProperties(f);
        CHECK(p.wavelength_max == 650);
        CHECK(p.gauss_rmse_left <= 1e-9);
        CHECK(p.gauss_rmse_right <= 1e-9);
        if (left == right) CHECK(p.half_max_upper - 650 == doctest::Approx(650 - p.half_max_lower).epsilon(1e-12));
    }
}

TEST_CASE("feature table layout") {
    const BandDepthSpeclib bd(support::row({0, 0.2, 0.5, 0, 0.1, 0}, support::grid(400, 100, 6)));
    const std::vector<double> anchors = {600, 400};
    std::ostringstream os;
    writeFeatureTable(bd, anchors, specfeat(bd, anchors), os);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    CHECK(header ==
          "id,f600_area,f600_width,f600_max_depth,f600_wl_max,f600_gauss_left,f600_gauss_right,"
          "f400_area,f400_width,f400_max_depth,f400_wl_max,f400_gauss_left,f400_gauss_right");
    CHECK(row.rfind("1,", 0) == 0);
    CHECK(std::stod(row.substr(2)) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(row.find("NA,NA,NA,NA,NA,NA") != std::string::npos);
}

}  // TEST_SUITE
