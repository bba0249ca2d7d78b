#pragma once

#include <string>
#include <vector>

#include "specwb/speclib.hpp"

namespace specwb {

enum class FilterMethod { SavitzkyGolay, Mean, Lowess, Spline };

FilterMethod parseFilterMethod(const std::string& name);

struct FilterSpec {
    FilterMethod method = FilterMethod::SavitzkyGolay;
    int window = 15;        // odd band count (savitzky_golay, mean, spline)
    int poly_order = 3;     // savitzky_golay only
    double fraction = 0.1;  // lowess only, in (0, 1]

    void validate() const;
};

/// Smooths every spectrum; the wavelength grid is unchanged.
///
/// - mean: moving average with half-sample symmetric padding at the edges.
/// - savitzky_golay: local least-squares polynomial over the window. Near the
///   edges the polynomial of the first/last full window is evaluated instead
///   of padding, so polynomials up to poly_order pass through unchanged.
/// - lowess: locally weighted linear regression with tricube weights over the
///   ceil(fraction * bands) nearest bands (no robustness iterations).
/// - spline: cubic smoothing spline on band index with smoothing parameter
///   (window / 3.7909)^4, which puts its half-gain frequency where the mean
///   filter of the same length has it. Approximate by construction.
Speclib noiseFilter(const Speclib& s, const FilterSpec& spec);

/// Per-row variants used by noiseFilter; exposed for tests.
std::vector<double> savitzkyGolayCoefficients(int window, int poly_order, int position);

/// First or second derivative along wavelength. Three-point formulas on the
/// (possibly non-uniform) grid, one-sided at the edges. Units are value/nm^order.
Speclib derivative(const Speclib& s, int order);

struct SensorBandSpec {
    double center = 0;  // nm
    double fwhm = 0;    // nm
};

double fwhmToSigma(double fwhm);

/// Gaussian response resampling. Output band k is the weighted mean of the
/// source bands within center +/- 2 sigma, weights exp(-(l - c)^2 / (2 sigma^2)).
Speclib spectralResample(const Speclib& s, const std::vector<SensorBandSpec>& target);

/// Resampling with explicit response curves: one row of `response` per target
/// band, interpolated linearly onto the source centers (zero outside the
/// response grid). Output centers are the response-weighted mean wavelengths.
Speclib spectralResample(const Speclib& s, const Speclib& response);

}  // namespace specwb
