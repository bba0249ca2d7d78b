#include "specwb/speclib.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace specwb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t shortestDigits(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return static_cast<std::size_t>(res.ptr - buf);
}

// Nanometer value whose division by 1000 gives back u exactly; among several
// such neighbors of u * 1000 the one with the shortest decimal form wins.
double micrometersToNanometers(double u) {
    const double guess = u * 1000.0;
    double best = guess;
    bool found = false;
    double x = guess;
    for (int k = 0; k < 4; ++k) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
    for (int k = 0; k < 9; ++k, x = std::nextafter(x, std::numeric_limits<double>::infinity())) {
        if (x / 1000.0 != u) continue;
        if (!found || shortestDigits(x) < shortestDigits(best)) best = x;
        found = true;
    }
    return best;
}

bool sameValue(double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
}

std::optional<double> parseNumber(const std::string& raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    if (b == e) return kNaN;
    std::string_view v(raw.data() + b, e - b);
    if (v == "NA" || v == "NaN" || v == "nan") return kNaN;
    if (v.front() == '+') v.remove_prefix(1);
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
    return out;
}

void validateGrid(const WavelengthGrid& grid) {
    if (grid.centers.empty()) throw Error("wavelength grid is empty");
    if (grid.centers.size() != grid.fwhm.size())
        throw Error("fwhm length " + std::to_string(grid.fwhm.size()) +
                    " does not match band count " + std::to_string(grid.centers.size()));
    for (std::size_t k = 0; k < grid.centers.size(); ++k) {
        if (!std::isfinite(grid.centers[k])) throw Error("NaN wavelength at band " + std::to_string(k));
        if (k > 0 && !(grid.centers[k] > grid.centers[k - 1]))
            throw Error("non-monotone wavelength at band " + std::to_string(k));
        if (!(grid.fwhm[k] > 0) || !std::isfinite(grid.fwhm[k]))
            throw Error("fwhm must be positive at band " + std::to_string(k));
    }
}

}  // namespace

std::vector<double> fwhmFromCenters(const std::vector<double>& centers) {
    std::vector<double> out(centers.size(), 1.0);
    if (centers.size() < 2) return out;
    for (std::size_t k = 0; k + 1 < centers.size(); ++k) out[k] = centers[k + 1] - centers[k];
    out.back() = out[out.size() - 2];
    return out;
}

// --- SiColumn ---------------------------------------------------------------

SiColumn SiColumn::numeric(std::string name, std::vector<double> values) {
    SiColumn c;
    c.name_ = std::move(name);
    c.kind_ = SiKind::Numeric;
    c.numbers_ = std::move(values);
    return c;
}

SiColumn SiColumn::categorical(std::string name, std::vector<std::string> labels) {
    SiColumn c;
    c.name_ = std::move(name);
    c.kind_ = SiKind::Categorical;
    c.labels_ = std::move(labels);
    return c;
}

SiColumn SiColumn::text(std::string name, std::vector<std::string> labels) {
    SiColumn c = categorical(std::move(name), std::move(labels));
    c.kind_ = SiKind::Text;
    return c;
}

SiColumn SiColumn::infer(std::string name, const std::vector<std::string>& raw) {
    std::vector<double> values;
    values.reserve(raw.size());
    for (const auto& r : raw) {
        auto v = parseNumber(r);
        if (!v) return categorical(std::move(name), raw);
        values.push_back(*v);
    }
    return numeric(std::move(name), std::move(values));
}

std::size_t SiColumn::size() const {
    return kind_ == SiKind::Numeric ? numbers_.size() : labels_.size();
}

const std::vector<double>& SiColumn::numbers() const {
    if (kind_ != SiKind::Numeric) throw Error("SI column '" + name_ + "' is not numeric");
    return numbers_;
}

const std::vector<std::string>& SiColumn::labels() const {
    if (kind_ == SiKind::Numeric) throw Error("SI column '" + name_ + "' is numeric");
    return labels_;
}

SiCell SiColumn::cell(std::size_t row) const {
    if (kind_ == SiKind::Numeric) return numbers_.at(row);
    return labels_.at(row);
}

std::string SiColumn::cellText(std::size_t row) const {
    if (kind_ != SiKind::Numeric) return labels_.at(row);
    const double v = numbers_.at(row);
    if (std::isnan(v)) return "NA";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<std::string> SiColumn::levels() const {
    std::set<std::string> seen(labels().begin(), labels().end());
    return {seen.begin(), seen.end()};
}

SiColumn SiColumn::select(const std::vector<std::size_t>& rows) const {
    SiColumn c;
    c.name_ = name_;
    c.kind_ = kind_;
    if (kind_ == SiKind::Numeric) {
        c.numbers_.reserve(rows.size());
        for (auto r : rows) c.numbers_.push_back(numbers_.at(r));
    } else {
        c.labels_.reserve(rows.size());
        for (auto r : rows) c.labels_.push_back(labels_.at(r));
    }
    return c;
}

bool SiColumn::operator==(const SiColumn& other) const {
    if (name_ != other.name_ || kind_ != other.kind_ || labels_ != other.labels_) return false;
    if (numbers_.size() != other.numbers_.size()) return false;
    for (std::size_t i = 0; i < numbers_.size(); ++i)
        if (!sameValue(numbers_[i], other.numbers_[i])) return false;
    return true;
}

// --- SiTable ----------------------------------------------------------------

bool SiTable::has(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const SiColumn& c) { return c.name() == name; });
}

const SiColumn& SiTable::column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name() == name) return c;
    std::string known;
    for (const auto& c : columns_) known += (known.empty() ? "" : ", ") + c.name();
    throw Error("unknown SI column '" + name + "' (available: " + (known.empty() ? "none" : known) + ")");
}

void SiTable::set(SiColumn column) {
    if (column.name().empty()) throw Error("SI column name must not be empty");
    if (!columns_.empty() && column.size() != rows())
        throw Error("SI column '" + column.name() + "' has " + std::to_string(column.size()) +
                    " rows, expected " + std::to_string(rows()));
    for (auto& c : columns_) {
        if (c.name() == column.name()) {
            c = std::move(column);
            return;
        }
    }
    columns_.push_back(std::move(column));
}

SiTable SiTable::select(const std::vector<std::size_t>& rows) const {
    SiTable out;
    for (const auto& c : columns_) out.columns_.push_back(c.select(rows));
    return out;
}

// --- MaskRanges -------------------------------------------------------------

MaskRanges::MaskRanges(std::vector<MaskRange> ranges) {
    for (const auto& r : ranges)
        if (!(r.lo < r.hi)) throw Error("mask range requires lo < hi");
    std::sort(ranges.begin(), ranges.end(),
              [](const MaskRange& a, const MaskRange& b) { return a.lo < b.lo; });
    for (const auto& r : ranges) {
        if (!ranges_.empty() && r.lo <= ranges_.back().hi)
            ranges_.back().hi = std::max(ranges_.back().hi, r.hi);
        else
            ranges_.push_back(r);
    }
}

bool MaskRanges::contains(double wavelength) const {
    return std::any_of(ranges_.begin(), ranges_.end(), [&](const MaskRange& r) {
        return wavelength >= r.lo && wavelength < r.hi;
    });
}

MaskRanges MaskRanges::merged(const MaskRanges& other) const {
    std::vector<MaskRange> all = ranges_;
    all.insert(all.end(), other.ranges_.begin(), other.ranges_.end());
    return MaskRanges(std::move(all));
}

// --- Speclib ----------------------------------------------------------------

Speclib::Speclib(Matrix spectra, WavelengthGrid grid, SiTable si, MaskRanges mask,
                 std::vector<std::int64_t> ids, std::string value_unit)
    : spectra_(std::move(spectra)),
      grid_(std::move(grid)),
      si_(std::move(si)),
      mask_(std::move(mask)),
      ids_(std::move(ids)),
      value_unit_(std::move(value_unit)) {
    validateGrid(grid_);
    if (static_cast<std::size_t>(spectra_.cols()) != grid_.size())
        throw Error("dimension mismatch: " + std::to_string(spectra_.cols()) + " value columns vs " +
                    std::to_string(grid_.size()) + " wavelengths");
    if (!si_.empty() && si_.rows() != samples())
        throw Error("dimension mismatch: SI has " + std::to_string(si_.rows()) + " rows, spectra " +
                    std::to_string(samples()));
    if (ids_.empty()) {
        ids_.resize(samples());
        std::iota(ids_.begin(), ids_.end(), std::int64_t{1});
    } else if (ids_.size() != samples()) {
        throw Error("dimension mismatch: ID count differs from spectra rows");
    }
}

Speclib Speclib::withSpectra(Matrix spectra) const {
    if (spectra.rows() != spectra_.rows() || spectra.cols() != spectra_.cols())
        throw Error("withSpectra: shape mismatch");
    return Speclib(std::move(spectra), grid_, si_, mask_, ids_, value_unit_);
}

Speclib Speclib::withSpectra(Matrix spectra, WavelengthGrid grid) const {
    if (spectra.rows() != spectra_.rows()) throw Error("withSpectra: row count mismatch");
    return Speclib(std::move(spectra), std::move(grid), si_, MaskRanges{}, ids_, value_unit_);
}

Speclib Speclib::withSi(SiTable si) const {
    return Speclib(spectra_, grid_, std::move(si), mask_, ids_, value_unit_);
}

Speclib Speclib::withValueUnit(std::string unit) const {
    return Speclib(spectra_, grid_, si_, mask_, ids_, std::move(unit));
}

Speclib Speclib::selectRows(const std::vector<std::size_t>& rows) const {
    Matrix m(static_cast<Eigen::Index>(rows.size()), spectra_.cols());
    std::vector<std::int64_t> ids;
    ids.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= samples()) throw Error("row index out of range");
        m.row(static_cast<Eigen::Index>(r)) = spectra_.row(static_cast<Eigen::Index>(rows[r]));
        ids.push_back(ids_[rows[r]]);
    }
    if (rows.empty()) {
        // Eigen allows 0-row matrices; keep the grid so the result stays valid.
        return Speclib(std::move(m), grid_, si_.select(rows), mask_, {}, value_unit_);
    }
    return Speclib(std::move(m), grid_, si_.select(rows), mask_, std::move(ids), value_unit_);
}

Speclib Speclib::selectBands(const std::vector<std::size_t>& bands) const {
    if (bands.empty()) throw Error("band selection is empty");
    Matrix m(spectra_.rows(), static_cast<Eigen::Index>(bands.size()));
    WavelengthGrid g;
    for (std::size_t b = 0; b < bands.size(); ++b) {
        if (bands[b] >= this->bands()) throw Error("band index out of range");
        m.col(static_cast<Eigen::Index>(b)) = spectra_.col(static_cast<Eigen::Index>(bands[b]));
        g.centers.push_back(grid_.centers[bands[b]]);
        g.fwhm.push_back(grid_.fwhm[bands[b]]);
    }
    return Speclib(std::move(m), std::move(g), si_, mask_, ids_, value_unit_);
}

std::size_t Speclib::nearestBand(double wavelength) const {
    const auto& c = grid_.centers;
    auto it = std::lower_bound(c.begin(), c.end(), wavelength);
    if (it == c.begin()) return 0;
    if (it == c.end()) return c.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - c.begin());
    const std::size_t lo = hi - 1;
    return (c[hi] - wavelength < wavelength - c[lo]) ? hi : lo;
}

bool Speclib::operator==(const Speclib& other) const {
    if (spectra_.rows() != other.spectra_.rows() || spectra_.cols() != other.spectra_.cols())
        return false;
    for (Eigen::Index i = 0; i < spectra_.size(); ++i)
        if (!sameValue(spectra_.data()[i], other.spectra_.data()[i])) return false;
    return grid_ == other.grid_ && si_ == other.si_ && mask_ == other.mask_ && ids_ == other.ids_ &&
           value_unit_ == other.value_unit_;
}

// --- operations -------------------------------------------------------------

Speclib createSpeclib(Matrix values, std::vector<double> centers, std::optional<std::vector<double>> fwhm,
                      SiTable si, WavelengthUnit unit) {
    if (values.rows() == 0 || values.cols() == 0) throw Error("spectra matrix is empty");
    if (static_cast<std::size_t>(values.cols()) != centers.size())
        throw Error("dimension mismatch: " + std::to_string(values.cols()) + " bands vs " +
                    std::to_string(centers.size()) + " wavelengths");
    for (std::size_t k = 0; k < centers.size(); ++k)
        if (std::isnan(centers[k])) throw Error("NaN wavelength at band " + std::to_string(k));

    bool micrometers = unit == WavelengthUnit::Micrometer;
    if (unit == WavelengthUnit::Auto)
        micrometers = *std::max_element(centers.begin(), centers.end()) < 100.0;
    if (micrometers) {
        for (auto& c : centers) c = micrometersToNanometers(c);
        if (fwhm)
            for (auto& f : *fwhm) f = micrometersToNanometers(f);
    }
    for (std::size_t k = 1; k < centers.size(); ++k)
        if (!(centers[k] > centers[k - 1])) throw Error("non-monotone wavelength at band " + std::to_string(k));

    WavelengthGrid grid;
    grid.fwhm = fwhm ? std::move(*fwhm) : fwhmFromCenters(centers);
    grid.centers = std::move(centers);
    return Speclib(std::move(values), std::move(grid), std::move(si));
}

Speclib subsetByWavelength(const Speclib& s, double lo, double hi) {
    if (!(lo < hi)) throw Error("subset requires lo < hi");
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < s.bands(); ++k)
        if (s.wavelengths()[k] >= lo && s.wavelengths()[k] <= hi) keep.push_back(k);
    if (keep.empty()) throw Error("no band within [" + std::to_string(lo) + ", " + std::to_string(hi) + "] nm");
    return s.selectBands(keep);
}

Speclib filterBySI(const Speclib& s, const std::string& column, const SiPredicate& predicate) {
    const SiColumn& col = s.si().column(column);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < s.samples(); ++i)
        if (predicate(col.cell(i))) rows.push_back(i);
    return s.selectRows(rows);
}

SiPredicate siEquals(SiCell value) {
    return [value = std::move(value)](const SiCell& cell) { return cell == value; };
}

Speclib maskAndInterpolate(const Speclib& s, const MaskRanges& ranges) {
    if (ranges.empty()) return s;
    const auto& wl = s.wavelengths();
    std::vector<bool> masked(s.bands());
    std::vector<std::size_t> valid;
    for (std::size_t k = 0; k < s.bands(); ++k) {
        masked[k] = ranges.contains(wl[k]);
        if (!masked[k]) valid.push_back(k);
    }
    if (valid.empty()) throw Error("mask covers the entire wavelength grid");

    Matrix values = s.spectra();
    std::size_t left = 0;  // position in `valid` of the nearest unmasked band below k
    for (std::size_t k = valid.front() + 1; k < valid.back(); ++k) {
        while (valid[left + 1] < k) ++left;
        if (!masked[k]) continue;
        const std::size_t a = valid[left], b = valid[left + 1];
        const double t = (wl[k] - wl[a]) / (wl[b] - wl[a]);
        const auto ka = static_cast<Eigen::Index>(a), kb = static_cast<Eigen::Index>(b);
        values.col(static_cast<Eigen::Index>(k)) = values.col(ka) + t * (values.col(kb) - values.col(ka));
    }

    std::vector<std::size_t> keep;
    for (std::size_t k = valid.front(); k <= valid.back(); ++k) keep.push_back(k);
    Speclib interpolated(std::move(values), s.grid(), s.si(), s.mask().merged(ranges), s.ids(), s.valueUnit());
    return interpolated.selectBands(keep);
}

double spadToChlorophyll(double spad) {
    if (!(spad < 148.84)) throw Error("SPAD value " + std::to_string(spad) + " at or beyond the pole 148.84");
    return 117.1 * spad / (148.84 - spad);
}

}  // namespace specwb
