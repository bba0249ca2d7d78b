#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "specwb/error.hpp"

namespace specwb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Band centers and full-width-half-maximum values, both in nm.
struct WavelengthGrid {
    std::vector<double> centers;
    std::vector<double> fwhm;

    std::size_t size() const { return centers.size(); }
    bool operator==(const WavelengthGrid&) const = default;
};

/// Forward differences of the centers; the last band copies its predecessor.
/// A single band gets a width of 1 nm.
std::vector<double> fwhmFromCenters(const std::vector<double>& centers);

enum class SiKind { Numeric, Categorical, Text };

using SiCell = std::variant<double, std::string>;

/// One column of supplementary information. Numeric columns keep doubles
/// (missing values are NaN), the other kinds keep strings.
class SiColumn {
public:
    static SiColumn numeric(std::string name, std::vector<double> values);
    static SiColumn categorical(std::string name, std::vector<std::string> labels);
    static SiColumn text(std::string name, std::vector<std::string> labels);

    // Numeric when every non-empty entry parses as a number (empty and "NA"
    // become NaN), categorical otherwise.
    static SiColumn infer(std::string name, const std::vector<std::string>& raw);

    const std::string& name() const { return name_; }
    SiKind kind() const { return kind_; }
    bool isNumeric() const { return kind_ == SiKind::Numeric; }
    std::size_t size() const;

    const std::vector<double>& numbers() const;
    const std::vector<std::string>& labels() const;

    SiCell cell(std::size_t row) const;
    std::string cellText(std::size_t row) const;

    /// Distinct labels in sorted order (categorical/text columns).
    std::vector<std::string> levels() const;

    SiColumn select(const std::vector<std::size_t>& rows) const;

    bool operator==(const SiColumn& other) const;

private:
    std::string name_;
    SiKind kind_ = SiKind::Numeric;
    std::vector<double> numbers_;
    std::vector<std::string> labels_;
};

class SiTable {
public:
    SiTable() = default;

    std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
    std::size_t columnCount() const { return columns_.size(); }
    bool empty() const { return columns_.empty(); }

    bool has(const std::string& name) const;
    const SiColumn& column(const std::string& name) const;
    const std::vector<SiColumn>& columns() const { return columns_; }

    /// Appends or replaces a column. Row count must match existing columns.
    void set(SiColumn column);

    SiTable select(const std::vector<std::size_t>& rows) const;

    bool operator==(const SiTable&) const = default;

private:
    std::vector<SiColumn> columns_;
};

struct MaskRange {
    double lo = 0;
    double hi = 0;
    bool operator==(const MaskRange&) const = default;
};

/// Half-open wavelength intervals [lo, hi) flagged invalid. Overlapping or
/// touching intervals are merged on construction.
class MaskRanges {
public:
    MaskRanges() = default;
    explicit MaskRanges(std::vector<MaskRange> ranges);

    bool contains(double wavelength) const;
    bool empty() const { return ranges_.empty(); }
    const std::vector<MaskRange>& ranges() const { return ranges_; }

    MaskRanges merged(const MaskRanges& other) const;

    bool operator==(const MaskRanges&) const = default;

private:
    std::vector<MaskRange> ranges_;
};

enum class WavelengthUnit { Auto, Nanometer, Micrometer };

/// Spectra matrix (rows = samples, columns = bands) with its wavelength grid,
/// supplementary information, mask and stable row identifiers. Immutable:
/// every operation returns a new value.
class Speclib {
public:
    Speclib(Matrix spectra, WavelengthGrid grid, SiTable si = {}, MaskRanges mask = {},
            std::vector<std::int64_t> ids = {}, std::string value_unit = "reflectance");

    std::size_t samples() const { return static_cast<std::size_t>(spectra_.rows()); }
    std::size_t bands() const { return static_cast<std::size_t>(spectra_.cols()); }

    const Matrix& spectra() const { return spectra_; }
    const WavelengthGrid& grid() const { return grid_; }
    const std::vector<double>& wavelengths() const { return grid_.centers; }
    const std::vector<double>& fwhm() const { return grid_.fwhm; }
    const SiTable& si() const { return si_; }
    const MaskRanges& mask() const { return mask_; }
    const std::vector<std::int64_t>& ids() const { return ids_; }
    const std::string& valueUnit() const { return value_unit_; }

    /// Same rows, IDs, SI and grid with new values (same shape).
    Speclib withSpectra(Matrix spectra) const;
    /// Same rows, IDs and SI on a different grid.
    Speclib withSpectra(Matrix spectra, WavelengthGrid grid) const;
    Speclib withSi(SiTable si) const;
    Speclib withValueUnit(std::string unit) const;

    Speclib selectRows(const std::vector<std::size_t>& rows) const;
    Speclib selectBands(const std::vector<std::size_t>& bands) const;

    /// Index of the band whose center is nearest to the wavelength; ties
    /// resolve to the lower wavelength.
    std::size_t nearestBand(double wavelength) const;

    bool operator==(const Speclib&) const;

private:
    Matrix spectra_;
    WavelengthGrid grid_;
    SiTable si_;
    MaskRanges mask_;
    std::vector<std::int64_t> ids_;
    std::string value_unit_;
};

/// Builds a validated Speclib. With WavelengthUnit::Auto, centers whose
/// maximum is below 100 are taken as micrometers and scaled by 1000. Missing
/// fwhm values are filled from neighbor differences.
Speclib createSpeclib(Matrix values, std::vector<double> centers,
                      std::optional<std::vector<double>> fwhm = std::nullopt, SiTable si = {},
                      WavelengthUnit unit = WavelengthUnit::Auto);

/// Keeps bands with lo <= center <= hi.
Speclib subsetByWavelength(const Speclib& s, double lo, double hi);

using SiPredicate = std::function<bool(const SiCell&)>;

Speclib filterBySI(const Speclib& s, const std::string& column, const SiPredicate& predicate);

/// Predicate matching a numeric value exactly or a label verbatim.
SiPredicate siEquals(SiCell value);

/// Replaces masked bands by linear interpolation between the nearest
/// unmasked neighbors; masked bands at either end of the grid are dropped.
Speclib maskAndInterpolate(const Speclib& s, const MaskRanges& ranges);

/// Chlorophyll content (ug/cm^2) from a SPAD-502 reading.
double spadToChlorophyll(double spad);

}  // namespace specwb
