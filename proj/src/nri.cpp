#include "specwb/nri.hpp"

#include <cmath>

#include "specwb/io.hpp"

namespace specwb {

NriCube::NriCube(Matrix values, WavelengthGrid grid, SiTable si, std::vector<std::int64_t> ids,
                 std::vector<std::size_t> nan_counts)
    : values_(std::move(values)),
      grid_(std::move(grid)),
      si_(std::move(si)),
      ids_(std::move(ids)),
      nan_counts_(std::move(nan_counts)) {
    const std::size_t b = grid_.size();
    if (b < 2) throw Error("NRI cube needs at least 2 bands");
    if (pairs() != b * (b - 1) / 2) throw Error("NRI cube: pair count does not match the band count");
    if (ids_.size() != samples()) throw Error("NRI cube: id count does not match the sample count");
    if (nan_counts_.size() != pairs()) nan_counts_.assign(pairs(), 0);
}

double NriCube::at(std::size_t i, std::size_t j, std::size_t sample) const {
    if (i <= j || i >= bands()) throw Error("NRI pair needs i > j within the grid");
    return values_(static_cast<Eigen::Index>(sample), static_cast<Eigen::Index>(pairIndex(i, j)));
}

BandPair NriCube::pair(std::size_t index) const {
    if (index >= pairs()) throw Error("NRI pair index out of range");
    std::size_t i = static_cast<std::size_t>((1 + std::sqrt(1 + 8.0 * static_cast<double>(index))) / 2);
    while (i * (i - 1) / 2 > index) --i;
    while ((i + 1) * i / 2 <= index) ++i;
    return {i, index - i * (i - 1) / 2};
}

NriCube nriRecursive(const Speclib& s) {
    const std::size_t b = s.bands();
    if (b < 2) throw Error("nri needs at least 2 bands, got " + std::to_string(b));
    const Eigen::Index n = static_cast<Eigen::Index>(s.samples());
    Matrix values(n, static_cast<Eigen::Index>(b * (b - 1) / 2));
    std::vector<std::size_t> nan_counts(static_cast<std::size_t>(values.cols()), 0);
    const Matrix& r = s.spectra();
    for (std::size_t i = 1; i < b; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const std::size_t p = pairIndex(i, j);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double v = nriValue(r(k, static_cast<Eigen::Index>(i)), r(k, static_cast<Eigen::Index>(j)));
                if (std::isnan(v)) ++nan_counts[p];
                values(k, static_cast<Eigen::Index>(p)) = v;
            }
        }
    }
    return NriCube(std::move(values), s.grid(), s.si(), s.ids(), std::move(nan_counts));
}

std::string nriColumnName(double wl_i, double wl_j) {
    return "nri_" + formatNumber(wl_i) + "_" + formatNumber(wl_j);
}

void writeNriTable(const NriCube& cube, std::ostream& out) {
    const auto& wl = cube.grid().centers;
    out << "id";
    for (std::size_t p = 0; p < cube.pairs(); ++p) {
        const BandPair bp = cube.pair(p);
        out << ',' << nriColumnName(wl[bp.i], wl[bp.j]);
    }
    out << '\n';
    for (std::size_t k = 0; k < cube.samples(); ++k) {
        out << cube.ids()[k];
        for (std::size_t p = 0; p < cube.pairs(); ++p)
            out << ',' << formatNumber(cube.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)));
        out << '\n';
    }
}

}  // namespace specwb
