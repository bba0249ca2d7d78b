#include <algorithm>
#include <cmath>

#include "specwb/preprocess.hpp"

namespace specwb {

namespace {

Speclib applyWeights(const Speclib& s, const Matrix& weights, WavelengthGrid grid) {
    // weights: target bands x source bands, rows already normalized.
    Matrix out = s.spectra() * weights.transpose();
    return s.withSpectra(std::move(out), std::move(grid));
}

double interpolateResponse(const std::vector<double>& x, const Eigen::RowVectorXd& y, double at) {
    if (at < x.front() || at > x.back()) return 0.0;
    auto it = std::lower_bound(x.begin(), x.end(), at);
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    if (x[hi] == at) return y(static_cast<Eigen::Index>(hi));
    const std::size_t lo = hi - 1;
    const double t = (at - x[lo]) / (x[hi] - x[lo]);
    return y(static_cast<Eigen::Index>(lo)) + t * (y(static_cast<Eigen::Index>(hi)) - y(static_cast<Eigen::Index>(lo)));
}

// Width between the outermost half-maximum crossings of a response curve.
double halfMaxWidth(const std::vector<double>& x, const Eigen::RowVectorXd& y) {
    Eigen::Index peak = 0;
    const double top = y.maxCoeff(&peak);
    const double half = top / 2;
    double left = x.front(), right = x.back();
    for (Eigen::Index k = peak; k > 0; --k) {
        if (y(k - 1) < half) {
            left = x[k - 1] + (half - y(k - 1)) / (y(k) - y(k - 1)) * (x[k] - x[k - 1]);
            break;
        }
    }
    for (Eigen::Index k = peak; k + 1 < y.size(); ++k) {
        if (y(k + 1) < half) {
            right = x[k] + (y(k) - half) / (y(k) - y(k + 1)) * (x[k + 1] - x[k]);
            break;
        }
    }
    return std::max(right - left, 1e-9);
}

}  // namespace

double fwhmToSigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

Speclib spectralResample(const Speclib& s, const std::vector<SensorBandSpec>& target) {
    if (target.empty()) throw Error("resampling target is empty");
    const auto& wl = s.wavelengths();
    Matrix weights = Matrix::Zero(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(s.bands()));
    WavelengthGrid grid;
    for (std::size_t k = 0; k < target.size(); ++k) {
        const auto& band = target[k];
        if (!(band.fwhm > 0)) throw Error("target band fwhm must be positive");
        const double sigma = fwhmToSigma(band.fwhm);
        double total = 0;
        for (std::size_t j = 0; j < wl.size(); ++j) {
            const double d = wl[j] - band.center;
            if (std::abs(d) > 2 * sigma) continue;
            const double w = std::exp(-d * d / (2 * sigma * sigma));
            weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = w;
            total += w;
        }
        if (total <= 0)
            throw Error("target band at " + std::to_string(band.center) + " nm has no source band within +/-2 sigma");
        weights.row(static_cast<Eigen::Index>(k)) /= total;
        grid.centers.push_back(band.center);
        grid.fwhm.push_back(band.fwhm);
    }
    return applyWeights(s, weights, std::move(grid));
}

Speclib spectralResample(const Speclib& s, const Speclib& response) {
    const auto& wl = s.wavelengths();
    const auto& rx = response.wavelengths();
    const Eigen::Index targets = static_cast<Eigen::Index>(response.samples());
    if (targets == 0) throw Error("response library has no curves");
    Matrix weights = Matrix::Zero(targets, static_cast<Eigen::Index>(s.bands()));
    WavelengthGrid grid;
    for (Eigen::Index k = 0; k < targets; ++k) {
        const Eigen::RowVectorXd curve = response.spectra().row(k);
        if ((curve.array() < 0).any()) throw Error("response curves must be nonnegative");
        double total = 0, moment = 0;
        for (std::size_t j = 0; j < wl.size(); ++j) {
            const double w = interpolateResponse(rx, curve, wl[j]);
            weights(k, static_cast<Eigen::Index>(j)) = w;
            total += w;
            moment += w * wl[j];
        }
        if (total <= 0)
            throw Error("response curve " + std::to_string(k + 1) + " does not overlap the source wavelengths");
        weights.row(k) /= total;
        grid.centers.push_back(moment / total);
        grid.fwhm.push_back(halfMaxWidth(rx, curve));
    }
    return applyWeights(s, weights, std::move(grid));
}

}  // namespace specwb
