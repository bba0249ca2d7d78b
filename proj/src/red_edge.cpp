#include <algorithm>
#include <cmath>
#include <limits>

#include "specwb/indices.hpp"
#include "specwb/preprocess.hpp"

namespace specwb {

namespace {

constexpr double kWindowLo = 660, kWindowHi = 800;

std::size_t nearest(const std::vector<double>& wl, double at) {
    auto it = std::lower_bound(wl.begin(), wl.end(), at);
    if (it == wl.begin()) return 0;
    if (it == wl.end()) return wl.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - wl.begin());
    return (wl[hi] - at < at - wl[hi - 1]) ? hi : hi - 1;
}

std::vector<double> firstDerivative(const std::vector<double>& wl, const std::vector<double>& r) {
    Matrix m(1, static_cast<Eigen::Index>(r.size()));
    for (std::size_t k = 0; k < r.size(); ++k) m(0, static_cast<Eigen::Index>(k)) = r[k];
    const Speclib d = derivative(Speclib(m, WavelengthGrid{wl, fwhmFromCenters(wl)}), 1);
    return {d.spectra().data(), d.spectra().data() + d.spectra().size()};
}

struct LineFit {
    double slope = 0, intercept = 0;
};

LineFit fitLine(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi, const char* flank) {
    double n = 0, sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (x[k] >= lo && x[k] <= hi) n += 1, sx += x[k], sy += y[k];
    if (n < 2) throw Error(std::string("missing coverage: fewer than 2 bands in the ") + flank + " flank");
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (x[k] >= lo && x[k] <= hi) sxx += (x[k] - mx) * (x[k] - mx), sxy += (x[k] - mx) * (y[k] - my);
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

RedEdgeResult linearInterpolation(const std::vector<double>& wl, const std::vector<double>& r) {
    auto at = [&](double nm) { return r[nearest(wl, nm)]; };
    const double edge = (at(670) + at(780)) / 2;
    const double denom = at(740) - at(700);
    if (denom == 0) throw Error("no red edge: R740 equals R700");
    RedEdgeResult res;
    res.reip = 700 + 40 * ((edge - at(700)) / denom);
    res.auxiliary["r_edge"] = edge;
    return res;
}

RedEdgeResult linearExtrapolation(const std::vector<double>& wl, const std::vector<double>& r) {
    const auto d1 = firstDerivative(wl, r);
    const LineFit far_red = fitLine(wl, d1, 680, 700, "far-red");
    const LineFit nir = fitLine(wl, d1, 725, 760, "near-infrared");
    if (far_red.slope == nir.slope) throw Error("no red edge: derivative flanks are parallel");
    RedEdgeResult res;
    res.reip = (nir.intercept - far_red.intercept) / (far_red.slope - nir.slope);
    res.auxiliary = {{"far_red_slope", far_red.slope},
                     {"far_red_intercept", far_red.intercept},
                     {"nir_slope", nir.slope},
                     {"nir_intercept", nir.intercept}};
    return res;
}

// R(l) = rs - (rs - r0) exp(-(l - l0)^2 / (2 s^2)) by Gauss-Newton with step
// halving.
RedEdgeResult gaussianFit(const std::vector<double>& wl, const std::vector<double>& r) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < wl.size(); ++k)
        if (wl[k] >= kWindowLo && wl[k] <= kWindowHi) x.push_back(wl[k]), y.push_back(r[k]);
    if (x.size() < 5) throw Error("missing coverage: fewer than 5 bands in 660-800 nm");

    const auto d1 = firstDerivative(wl, r);
    std::size_t steepest = nearest(wl, kWindowLo);
    for (std::size_t k = 0; k < wl.size(); ++k)
        if (wl[k] >= kWindowLo && wl[k] <= kWindowHi && d1[k] > d1[steepest]) steepest = k;
    if (!(d1[steepest] > 0)) throw Error("no red edge: reflectance does not rise in 660-800 nm");

    Eigen::Vector4d p(*std::max_element(y.begin(), y.end()), r[nearest(wl, 670)], wl[steepest], 30.0);
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());

    auto residuals = [&](const Eigen::Vector4d& q, Vector& res, Matrix* jac) {
        res.resize(n);
        if (jac) jac->resize(n, 4);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dx = x[static_cast<std::size_t>(i)] - q(2);
            const double e = std::exp(-dx * dx / (2 * q(3) * q(3)));
            res(i) = q(0) - (q(0) - q(1)) * e - y[static_cast<std::size_t>(i)];
            if (jac) {
                (*jac)(i, 0) = 1 - e;
                (*jac)(i, 1) = e;
                (*jac)(i, 2) = -(q(0) - q(1)) * e * dx / (q(3) * q(3));
                (*jac)(i, 3) = -(q(0) - q(1)) * e * dx * dx / (q(3) * q(3) * q(3));
            }
        }
    };

    Vector res;
    Matrix jac;
    residuals(p, res, &jac);
    double sse = res.squaredNorm();
    int iter = 0;
    bool converged = false;
    for (; iter < 200 && !converged; ++iter) {
        const Eigen::Vector4d step = jac.colPivHouseholderQr().solve(-res);
        double scale = 1;
        bool improved = false;
        Vector trial_res;
        for (int h = 0; h < 40; ++h, scale /= 2) {
            const Eigen::Vector4d trial = p + scale * step;
            residuals(trial, trial_res, nullptr);
            if (trial_res.squaredNorm() <= sse) {
                improved = true;
                break;
            }
        }
        const Eigen::Vector4d applied = scale * step;
        converged = (applied.array().abs() <= 1e-10 * (1 + p.array().abs())).all();
        if (!improved) {
            // No descent along the Gauss-Newton direction: already at the
            // numerical minimum.
            converged = true;
            break;
        }
        p += applied;
        residuals(p, res, &jac);
        sse = res.squaredNorm();
    }
    if (!converged) throw Error("red edge Gaussian fit did not converge within 200 iterations");

    RedEdgeResult out;
    const double sigma = std::abs(p(3));
    out.reip = p(2) + sigma;
    out.auxiliary = {{"rs", p(0)}, {"r0", p(1)}, {"lambda0", p(2)}, {"sigma", sigma}, {"iterations", iter}};
    return out;
}

void requireCoverage(const std::vector<double>& wl, double half_first, double half_last) {
    if (wl.empty() || wl.front() - half_first > kWindowLo || wl.back() + half_last < kWindowHi)
        throw Error("missing coverage: red edge methods need bands spanning 660-800 nm");
}

}  // namespace

RedEdgeMethod parseRedEdgeMethod(const std::string& name) {
    if (name == "gaussian_fit" || name == "gauss") return RedEdgeMethod::GaussianFit;
    if (name == "linear_extrapolation" || name == "LE") return RedEdgeMethod::LinearExtrapolation;
    if (name == "linear_interpolation" || name == "LI") return RedEdgeMethod::LinearInterpolation;
    throw Error("unknown red edge method '" + name +
                "' (expected gaussian_fit, linear_extrapolation or linear_interpolation)");
}

std::string redEdgeMethodName(RedEdgeMethod method) {
    switch (method) {
        case RedEdgeMethod::GaussianFit: return "gaussian_fit";
        case RedEdgeMethod::LinearExtrapolation: return "linear_extrapolation";
        case RedEdgeMethod::LinearInterpolation: return "linear_interpolation";
    }
    return "";
}

RedEdgeResult redEdgeSpectrum(const std::vector<double>& wavelengths, const std::vector<double>& values,
                              RedEdgeMethod method) {
    if (wavelengths.size() != values.size()) throw Error("red edge: wavelength and value counts differ");
    const auto fw = fwhmFromCenters(wavelengths);
    requireCoverage(wavelengths, fw.empty() ? 0 : fw.front() / 2, fw.empty() ? 0 : fw.back() / 2);
    RedEdgeResult res;
    switch (method) {
        case RedEdgeMethod::GaussianFit: res = gaussianFit(wavelengths, values); break;
        case RedEdgeMethod::LinearExtrapolation: res = linearExtrapolation(wavelengths, values); break;
        case RedEdgeMethod::LinearInterpolation: res = linearInterpolation(wavelengths, values); break;
    }
    res.method = method;
    if (!std::isfinite(res.reip)) throw Error("no red edge: non-finite position");
    res.in_expected_range = res.reip >= 680 && res.reip <= 760;
    return res;
}

std::vector<RedEdgeResult> redEdge(const Speclib& s, RedEdgeMethod method) {
    const auto& wl = s.wavelengths();
    requireCoverage(wl, s.fwhm().front() / 2, s.fwhm().back() / 2);
    std::vector<RedEdgeResult> out;
    out.reserve(s.samples());
    for (std::size_t i = 0; i < s.samples(); ++i) {
        const auto row = s.spectra().row(static_cast<Eigen::Index>(i));
        std::vector<double> values(s.bands());
        for (std::size_t k = 0; k < s.bands(); ++k) values[k] = row(static_cast<Eigen::Index>(k));
        try {
            out.push_back(redEdgeSpectrum(wl, values, method));
        } catch (const Error& e) {
            RedEdgeResult failed;
            failed.method = method;
            failed.reip = std::numeric_limits<double>::quiet_NaN();
            failed.error = e.what();
            out.push_back(std::move(failed));
        }
    }
    return out;
}

}  // namespace specwb
