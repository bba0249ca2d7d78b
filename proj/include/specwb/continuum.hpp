#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "specwb/speclib.hpp"

namespace specwb {

enum class HullMethod { ConvexHull, SegmentedHull };
enum class TransformOut { Raw, BandDepth, Ratio };

HullMethod parseHullMethod(const std::string& name);     // "ch" | "sh"
TransformOut parseTransformOut(const std::string& name);  // "raw" | "bd" | "ratio"

struct ContinuumLine {
    HullMethod method = HullMethod::ConvexHull;
    std::vector<std::size_t> fixpoints;  // band indices, ascending
    std::vector<double> cv;              // continuum value per band
};

/// Upper convex hull of (wavelength, value). Points lying exactly on a hull
/// edge are kept as fixpoints.
ContinuumLine convexHull(std::span<const double> wavelengths, std::span<const double> values);

/// Segmented upper hull: non-decreasing up to the global maximum and
/// non-increasing after it. Left of the maximum the fixpoints are the running
/// maxima seen from the left edge; right of it, the running maxima seen from
/// the right edge. Every point equal to the maximum is a fixpoint. This is
/// the tightest piecewise-linear envelope through data points that obeys the
/// slope-sign rule.
ContinuumLine segmentedUpperHull(std::span<const double> wavelengths, std::span<const double> values);

ContinuumLine continuumLine(std::span<const double> wavelengths, std::span<const double> values, HullMethod method);

struct TransformResult {
    Speclib spectra;
    HullMethod method;
    TransformOut out;
    // Bands whose continuum value was zero; these are set to 0.
    std::size_t degenerate_bands = 0;
};

/// raw: continuum values; bd: 1 - R/CV; ratio: R/CV.
TransformResult transformSpeclib(const Speclib& s, HullMethod method, TransformOut out, unsigned threads = 1);

/// A Speclib holding band depth values.
class BandDepthSpeclib {
public:
    explicit BandDepthSpeclib(Speclib values, HullMethod method = HullMethod::SegmentedHull)
        : values_(std::move(values)), method_(method) {}
    explicit BandDepthSpeclib(const TransformResult& transformed);

    const Speclib& speclib() const { return values_; }
    HullMethod method() const { return method_; }

private:
    Speclib values_;
    HullMethod method_;
};

inline constexpr double kFeatureEpsilon = 1e-9;

struct AbsorptionFeature {
    double anchor = 0;         // requested wavelength, nm
    bool empty = true;         // no positive band depth at the anchor
    bool duplicate = false;    // same segment as an earlier anchor of this spectrum
    std::size_t first_band = 0;  // bounding band indices (inclusive)
    std::size_t last_band = 0;
    std::vector<double> wavelengths;
    std::vector<double> depth;

    double lowerBound() const { return wavelengths.front(); }
    double upperBound() const { return wavelengths.back(); }
};

/// For each spectrum and anchor, the run of band depth > epsilon that contains
/// the band nearest the anchor, extended to the bounding bands on either
/// side (the zero crossings, or the grid edge).
std::vector<std::vector<AbsorptionFeature>> specfeat(const BandDepthSpeclib& bd, const std::vector<double>& anchors);

struct FeatureProperties {
    double area = 0;            // sum of band depth values
    double max_depth = 0;
    double wavelength_max = 0;  // nm
    double half_max_lower = 0;  // nm, half-maximum crossing left of the peak
    double half_max_upper = 0;  // nm
    double half_max_width = 0;  // nm
    double gauss_rmse_left = 0;
    double gauss_rmse_right = 0;
};

/// Scalar descriptors of one non-empty feature. The reference Gaussian is
/// pinned at the peak; each flank gets its own sigma, taken from where that
/// flank falls to half maximum.
FeatureProperties featureProperties(const AbsorptionFeature& feature);

/// Table with one row per spectrum: id, then per anchor
/// f<anchor>_area, f<anchor>_width, f<anchor>_max_depth, f<anchor>_wl_max,
/// f<anchor>_gauss_left, f<anchor>_gauss_right. Empty features give NA.
void writeFeatureTable(const BandDepthSpeclib& bd, const std::vector<double>& anchors,
                       const std::vector<std::vector<AbsorptionFeature>>& features, std::ostream& out);

}  // namespace specwb
