#pragma once

#include <filesystem>
#include <limits>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "specwb/speclib.hpp"

namespace specwb {

/// (a - b) / (a + b); NaN when a + b == 0.
inline double nriValue(double a, double b) {
    const double s = a + b;
    return s == 0 ? std::numeric_limits<double>::quiet_NaN() : (a - b) / s;
}

/// Linear slot of band pair (i, j), i > j, in the lower-triangle layout.
inline std::size_t pairIndex(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }

struct BandPair {
    std::size_t i = 0;  // i > j
    std::size_t j = 0;
};

/// Normalized ratio indices for every band pair i > j and every sample.
/// Column pairIndex(i, j) of values() holds the samples of pair (i, j).
class NriCube {
public:
    NriCube(Matrix values, WavelengthGrid grid, SiTable si, std::vector<std::int64_t> ids,
            std::vector<std::size_t> nan_counts);

    std::size_t bands() const { return grid_.size(); }
    std::size_t pairs() const { return static_cast<std::size_t>(values_.cols()); }
    std::size_t samples() const { return static_cast<std::size_t>(values_.rows()); }

    double at(std::size_t i, std::size_t j, std::size_t sample) const;
    BandPair pair(std::size_t index) const;

    const Matrix& values() const { return values_; }
    const WavelengthGrid& grid() const { return grid_; }
    const SiTable& si() const { return si_; }
    const std::vector<std::int64_t>& ids() const { return ids_; }
    /// Samples with a zero denominator, per pair.
    const std::vector<std::size_t>& nanCounts() const { return nan_counts_; }

private:
    Matrix values_;
    WavelengthGrid grid_;
    SiTable si_;
    std::vector<std::int64_t> ids_;
    std::vector<std::size_t> nan_counts_;
};

NriCube nriRecursive(const Speclib& s);

// ---------------------------------------------------------------------------
// Per-pair GLMs
// ---------------------------------------------------------------------------

enum class GlmFamily { Binomial, Gaussian };

GlmFamily parseGlmFamily(const std::string& name);

struct GlmStats {
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double coefficient = std::numeric_limits<double>::quiet_NaN();
    double se_intercept = std::numeric_limits<double>::quiet_NaN();
    double se_coefficient = std::numeric_limits<double>::quiet_NaN();
    double z_value = std::numeric_limits<double>::quiet_NaN();
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double deviance = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    bool separated = false;
};

/// y ~ b0 + b1 x. Binomial: IRLS with logit link from b = 0, at most 50
/// iterations, stopping when the deviance changes by less than 1e-10.
/// Perfect separation (|b| > 30, rising deviance or zero deviance) leaves
/// converged = false with z and p NaN. Gaussian: ordinary least squares.
/// z is the Wald statistic, p two-sided against the standard normal.
GlmStats fitGlm(const std::vector<double>& x, const std::vector<double>& y, GlmFamily family);

/// Per-iteration deviance of the binomial fit, for diagnostics and tests.
std::vector<double> binomialDevianceTrace(const std::vector<double>& x, const std::vector<double>& y);

/// Standard normal CDF.
double normalCdf(double z);
/// Two-sided p-value of a standard normal statistic.
double twoSidedNormalP(double z);

struct GlmGrid {
    WavelengthGrid grid;
    GlmFamily family = GlmFamily::Binomial;
    std::vector<GlmStats> stats;  // indexed by pairIndex(i, j)
};

/// Fits every band pair against the response on a pool of `threads` workers.
/// Results are written by pair index, so they do not depend on the worker count.
GlmGrid glmNri(const NriCube& cube, const std::vector<double>& response, GlmFamily family, unsigned threads = 1);
GlmGrid glmNri(const NriCube& cube, const std::string& response_column, GlmFamily family, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Correlograms
// ---------------------------------------------------------------------------

enum class GlmStatistic { Coefficient, ZValue, PValue };

GlmStatistic parseGlmStatistic(const std::string& name);  // coefficient | z.value | p.value
double statisticValue(const GlmStats& s, GlmStatistic statistic);

struct PairRank {
    BandPair pair;
    double wl_i = 0, wl_j = 0;
    double p_value = 0;
};

struct CorrelogramSummary {
    double min_value = 0, max_value = 0;  // range of the plotted statistic
    PairRank best;                         // smallest p-value
    PairRank worst;                        // largest p-value
};

/// Position of a value on the color ramp spanning [lo, hi], in [0, 1]. With
/// log_scale the positions are computed on log10 values.
double rampPosition(double value, double lo, double hi, bool log_scale);

struct Rgb {
    unsigned char r, g, b;
};
Rgb rampColor(double position);

/// Writes "wl_i,wl_j,value" rows for the lower triangle to csv_path and a
/// binary PPM heatmap (row i, column j) to ppm_path. NaN cells are gray,
/// the unused upper triangle black.
CorrelogramSummary correlogramExport(const GlmGrid& grid, GlmStatistic statistic, bool log_scale,
                                     const std::filesystem::path& csv_path,
                                     const std::filesystem::path& ppm_path, int cell_pixels = 4);

// ---------------------------------------------------------------------------
// Predictor matrices
// ---------------------------------------------------------------------------

struct MlDataset {
    std::string response_name;
    SiColumn response = SiColumn::numeric("", {});
    std::vector<std::string> predictor_names;
    Matrix predictors;  // samples x predictors
    std::vector<std::int64_t> ids;
    std::size_t dropped_nan = 0;       // columns with NaN values
    std::size_t dropped_constant = 0;  // columns without variation
};

std::string nriColumnName(double wl_i, double wl_j);

/// NRI pair columns "nri_<wl_i>_<wl_j>", then the extra SI predictors.
/// Categorical extras become 0/1 indicator columns "<name>=<level>" for every
/// level but the first (sorted) one. Columns with NaN values and constant
/// columns are dropped.
MlDataset buildMlDataset(const NriCube& cube, const std::string& response,
                         const std::vector<std::string>& extra_predictors);

/// Greedy correlation filter: while some pair of predictors has |r| >= cutoff,
/// take the pair with the largest |r| and drop whichever member has the larger
/// mean absolute correlation with the other remaining predictors (ties drop
/// the lexicographically later name).
MlDataset correlationCutoffFilter(const MlDataset& dataset, double cutoff);

Matrix pearsonMatrix(const Matrix& columns);

/// Response first, then predictors; no ID column.
void writeMlDataset(const MlDataset& dataset, std::ostream& out);
/// Reads the layout written by writeMlDataset; predictors must be numeric.
MlDataset readMlDataset(std::istream& in);

/// id, then one column per pair in pair-index order.
void writeNriTable(const NriCube& cube, std::ostream& out);
/// wl_i, wl_j, then the GlmStats fields.
void writeGlmTable(const GlmGrid& grid, std::ostream& out);

struct MlExportSummary {
    std::size_t predictors = 0;
    std::size_t dropped_nan = 0;
    std::size_t dropped_constant = 0;
};

MlExportSummary exportMlMatrix(const NriCube& cube, const std::string& response,
                               const std::vector<std::string>& extra_predictors,
                               const std::filesystem::path& path);

}  // namespace specwb
