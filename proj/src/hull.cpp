#include <algorithm>

#include "specwb/continuum.hpp"
#include "specwb/parallel.hpp"

namespace specwb {

namespace {

void requireBands(std::span<const double> wavelengths, std::span<const double> values) {
    if (wavelengths.size() != values.size()) throw Error("hull: wavelength and value counts differ");
    if (values.size() < 3) throw Error("hull needs at least 3 bands, got " + std::to_string(values.size()));
}

// Positive when o -> a -> b turns counter-clockwise.
double cross(std::span<const double> x, std::span<const double> y, std::size_t o, std::size_t a, std::size_t b) {
    return (x[a] - x[o]) * (y[b] - y[o]) - (y[a] - y[o]) * (x[b] - x[o]);
}

std::vector<double> interpolateFixpoints(std::span<const double> x, std::span<const double> y,
                                         const std::vector<std::size_t>& fix) {
    std::vector<double> cv(y.size());
    for (std::size_t s = 0; s + 1 < fix.size(); ++s) {
        const std::size_t a = fix[s], b = fix[s + 1];
        cv[a] = y[a];
        for (std::size_t k = a + 1; k < b; ++k) cv[k] = y[a] + (y[b] - y[a]) * (x[k] - x[a]) / (x[b] - x[a]);
    }
    cv[fix.back()] = y[fix.back()];
    return cv;
}

}  // namespace

HullMethod parseHullMethod(const std::string& name) {
    if (name == "ch") return HullMethod::ConvexHull;
    if (name == "sh") return HullMethod::SegmentedHull;
    throw Error("unknown hull method '" + name + "' (expected ch or sh)");
}

TransformOut parseTransformOut(const std::string& name) {
    if (name == "raw") return TransformOut::Raw;
    if (name == "bd") return TransformOut::BandDepth;
    if (name == "ratio") return TransformOut::Ratio;
    throw Error("unknown transform output '" + name + "' (expected raw, bd or ratio)");
}

ContinuumLine convexHull(std::span<const double> x, std::span<const double> y) {
    requireBands(x, y);
    std::vector<std::size_t> hull;
    for (std::size_t k = 0; k < y.size(); ++k) {
        while (hull.size() >= 2 && cross(x, y, hull[hull.size() - 2], hull.back(), k) > 0) hull.pop_back();
        hull.push_back(k);
    }
    ContinuumLine line;
    line.method = HullMethod::ConvexHull;
    line.cv = interpolateFixpoints(x, y, hull);
    line.fixpoints = std::move(hull);
    return line;
}

ContinuumLine segmentedUpperHull(std::span<const double> x, std::span<const double> y) {
    requireBands(x, y);
    const std::size_t n = y.size();
    const auto top = std::max_element(y.begin(), y.end());
    const double peak = *top;
    const std::size_t first_max = static_cast<std::size_t>(top - y.begin());
    std::size_t last_max = first_max;
    for (std::size_t k = first_max; k < n; ++k)
        if (y[k] == peak) last_max = k;

    std::vector<std::size_t> fix;
    double running = y[0];
    for (std::size_t k = 0; k < first_max; ++k) {
        if (k == 0 || y[k] >= running) {
            fix.push_back(k);
            running = y[k];
        }
    }
    for (std::size_t k = first_max; k <= last_max; ++k)
        if (y[k] == peak) fix.push_back(k);
    std::vector<std::size_t> right;
    running = y[n - 1];
    for (std::size_t k = n - 1; k > last_max; --k) {
        if (k == n - 1 || y[k] >= running) {
            right.push_back(k);
            running = y[k];
        }
    }
    fix.insert(fix.end(), right.rbegin(), right.rend());

    ContinuumLine line;
    line.method = HullMethod::SegmentedHull;
    line.cv = interpolateFixpoints(x, y, fix);
    line.fixpoints = std::move(fix);
    return line;
}

ContinuumLine continuumLine(std::span<const double> x, std::span<const double> y, HullMethod method) {
    return method == HullMethod::ConvexHull ? convexHull(x, y) : segmentedUpperHull(x, y);
}

TransformResult transformSpeclib(const Speclib& s, HullMethod method, TransformOut out, unsigned threads) {
    if (s.bands() < 3) throw Error("continuum transform needs at least 3 bands");
    const std::size_t n = s.samples(), bands = s.bands();
    // Row-major copy so each spectrum is contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> in = s.spectra();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> result(in.rows(), in.cols());
    std::vector<std::size_t> degenerate(n, 0);
    const std::span<const double> wl(s.wavelengths());

    parallelFor(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::span<const double> r(in.data() + i * bands, bands);
            const ContinuumLine line = continuumLine(wl, r, method);
            double* dst = result.data() + i * bands;
            for (std::size_t k = 0; k < bands; ++k) {
                if (out == TransformOut::Raw) {
                    dst[k] = line.cv[k];
                    continue;
                }
                if (line.cv[k] == 0) {
                    dst[k] = 0;
                    ++degenerate[i];
                    continue;
                }
                const double ratio = r[k] / line.cv[k];
                dst[k] = out == TransformOut::Ratio ? ratio : std::max(0.0, 1.0 - ratio);
            }
        }
    });

    std::size_t total = 0;
    for (auto d : degenerate) total += d;
    const char* unit = out == TransformOut::Raw ? "continuum" : out == TransformOut::Ratio ? "ratio" : "band depth";
    return {s.withSpectra(Matrix(result)).withValueUnit(unit), method, out, total};
}

BandDepthSpeclib::BandDepthSpeclib(const TransformResult& transformed)
    : values_(transformed.spectra), method_(transformed.method) {
    if (transformed.out != TransformOut::BandDepth) throw Error("transform result does not hold band depth values");
}

}  // namespace specwb
