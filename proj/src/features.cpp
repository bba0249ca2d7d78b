#include <algorithm>
#include <cmath>

#include "specwb/continuum.hpp"
#include "specwb/io.hpp"

namespace specwb {

std::vector<std::vector<AbsorptionFeature>> specfeat(const BandDepthSpeclib& bd, const std::vector<double>& anchors) {
    const Speclib& s = bd.speclib();
    const auto& wl = s.wavelengths();
    for (double a : anchors)
        if (!(a >= wl.front() && a <= wl.back()))
            throw Error("anchor " + formatNumber(a) + " nm outside the grid [" + formatNumber(wl.front()) + ", " +
                        formatNumber(wl.back()) + "]");

    std::vector<std::vector<AbsorptionFeature>> out(s.samples());
    const std::size_t last = s.bands() - 1;
    for (std::size_t i = 0; i < s.samples(); ++i) {
        const auto row = s.spectra().row(static_cast<Eigen::Index>(i));
        auto depth = [&](std::size_t k) { return row(static_cast<Eigen::Index>(k)); };
        for (double anchor : anchors) {
            AbsorptionFeature f;
            f.anchor = anchor;
            const std::size_t k = s.nearestBand(anchor);
            if (depth(k) > kFeatureEpsilon) {
                std::size_t lo = k, hi = k;
                while (lo > 0 && depth(lo) > kFeatureEpsilon) --lo;
                while (hi < last && depth(hi) > kFeatureEpsilon) ++hi;
                f.empty = false;
                f.first_band = lo;
                f.last_band = hi;
                for (std::size_t b = lo; b <= hi; ++b) {
                    f.wavelengths.push_back(wl[b]);
                    f.depth.push_back(depth(b));
                }
                f.duplicate = std::any_of(out[i].begin(), out[i].end(), [&](const AbsorptionFeature& g) {
                    return !g.empty && g.first_band == lo && g.last_band == hi;
                });
            }
            out[i].push_back(std::move(f));
        }
    }
    return out;
}

namespace {

// Half-maximum crossing on one flank, by linear interpolation between the
// bracketing bands. `step` is -1 for the left flank, +1 for the right.
double halfCrossing(const AbsorptionFeature& f, std::size_t peak, int step, double half) {
    const auto& x = f.wavelengths;
    const auto& d = f.depth;
    std::size_t k = peak;
    while (true) {
        if (step < 0 && k == 0) return x.front();
        if (step > 0 && k + 1 == d.size()) return x.back();
        const std::size_t next = step < 0 ? k - 1 : k + 1;
        if (d[next] < half) return x[next] + (half - d[next]) / (d[k] - d[next]) * (x[k] - x[next]);
        k = next;
    }
}

// Sigma of a Gaussian pinned at (x_peak, top) for one flank. The crossing is
// located by interpolating distance linearly in sqrt(ln(top / value)), which
// is exactly linear in distance for Gaussian samples.
double flankSigma(const AbsorptionFeature& f, std::size_t peak, int step, double top) {
    const auto& x = f.wavelengths;
    const auto& d = f.depth;
    const double half = top / 2;
    const double u_half = std::sqrt(std::log(2.0));
    auto u = [&](double v) { return std::sqrt(std::log(top / v)); };
    std::size_t k = peak;
    while (!((step < 0 && k == 0) || (step > 0 && k + 1 == d.size()))) {
        const std::size_t next = step < 0 ? k - 1 : k + 1;
        if (d[next] < half) {
            const double dist_in = std::abs(x[k] - x[peak]);
            const double dist_out = std::abs(x[next] - x[peak]);
            double crossing;
            if (d[next] > 0) {
                const double u_in = u(d[k]), u_out = u(d[next]);
                crossing = dist_in + (dist_out - dist_in) * (u_half - u_in) / (u_out - u_in);
            } else {
                crossing = dist_in + (d[k] - half) / (d[k] - d[next]) * (dist_out - dist_in);
            }
            return crossing / std::sqrt(2 * std::log(2.0));
        }
        k = next;
    }
    // Flank never drops to half maximum: use its outermost band.
    const double dist = std::abs(x[k] - x[peak]);
    if (dist == 0) return 0;
    if (d[k] > 0 && d[k] < top) return dist / std::sqrt(2 * std::log(top / d[k]));
    return dist / std::sqrt(2 * std::log(2.0));
}

double flankRmse(const AbsorptionFeature& f, std::size_t peak, int step, double top, double sigma) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < f.depth.size(); ++k) {
        if ((step < 0 && k >= peak) || (step > 0 && k <= peak)) continue;
        const double dx = f.wavelengths[k] - f.wavelengths[peak];
        const double g = sigma > 0 ? top * std::exp(-dx * dx / (2 * sigma * sigma)) : 0.0;
        sum += (f.depth[k] - g) * (f.depth[k] - g);
        ++count;
    }
    return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

}  // namespace

FeatureProperties featureProperties(const AbsorptionFeature& f) {
    if (f.empty || f.depth.empty()) throw Error("feature properties of an empty feature");
    if (f.depth.size() != f.wavelengths.size()) throw Error("feature wavelength/depth length mismatch");
    FeatureProperties p;
    std::size_t peak = 0;
    for (std::size_t k = 0; k < f.depth.size(); ++k) {
        p.area += f.depth[k];
        if (f.depth[k] > f.depth[peak]) peak = k;
    }
    p.max_depth = f.depth[peak];
    p.wavelength_max = f.wavelengths[peak];
    if (f.depth.size() == 1) {
        p.half_max_lower = p.half_max_upper = p.wavelength_max;
        return p;
    }
    const double half = p.max_depth / 2;
    p.half_max_lower = halfCrossing(f, peak, -1, half);
    p.half_max_upper = halfCrossing(f, peak, +1, half);
    p.half_max_width = p.half_max_upper - p.half_max_lower;
    p.gauss_rmse_left = flankRmse(f, peak, -1, p.max_depth, flankSigma(f, peak, -1, p.max_depth));
    p.gauss_rmse_right = flankRmse(f, peak, +1, p.max_depth, flankSigma(f, peak, +1, p.max_depth));
    return p;
}

void writeFeatureTable(const BandDepthSpeclib& bd, const std::vector<double>& anchors,
                       const std::vector<std::vector<AbsorptionFeature>>& features, std::ostream& out) {
    const Speclib& s = bd.speclib();
    out << "id";
    for (double a : anchors) {
        const std::string p = "f" + formatNumber(a) + "_";
        out << ',' << p << "area," << p << "width," << p << "max_depth," << p << "wl_max," << p << "gauss_left,"
            << p << "gauss_right";
    }
    out << '\n';
    for (std::size_t i = 0; i < features.size(); ++i) {
        out << s.ids()[i];
        for (const auto& f : features[i]) {
            if (f.empty) {
                out << ",NA,NA,NA,NA,NA,NA";
                continue;
            }
            const auto p = featureProperties(f);
            out << ',' << formatNumber(p.area) << ',' << formatNumber(p.half_max_width) << ','
                << formatNumber(p.max_depth) << ',' << formatNumber(p.wavelength_max) << ','
                << formatNumber(p.gauss_rmse_left) << ',' << formatNumber(p.gauss_rmse_right);
        }
        out << '\n';
    }
}

}  // namespace specwb
