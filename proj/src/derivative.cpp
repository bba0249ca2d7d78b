#include "specwb/preprocess.hpp"

namespace specwb {

Speclib derivative(const Speclib& s, int order) {
    if (order != 1 && order != 2) throw Error("derivative order must be 1 or 2");
    const std::size_t n = s.bands();
    if (n < static_cast<std::size_t>(order) + 1)
        throw Error("derivative of order " + std::to_string(order) + " needs at least " + std::to_string(order + 1) +
                    " bands");
    const auto& x = s.wavelengths();
    const Matrix& f = s.spectra();
    Matrix out(f.rows(), f.cols());
    auto col = [&](std::size_t k) { return f.col(static_cast<Eigen::Index>(k)); };

    if (order == 1) {
        out.col(0) = (col(1) - col(0)) / (x[1] - x[0]);
        out.col(static_cast<Eigen::Index>(n - 1)) = (col(n - 1) - col(n - 2)) / (x[n - 1] - x[n - 2]);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double h1 = x[k] - x[k - 1], h2 = x[k + 1] - x[k];
            // Three-point formula, exact for quadratics on any spacing.
            out.col(static_cast<Eigen::Index>(k)) =
                (h1 * h1 * (col(k + 1) - col(k)) + h2 * h2 * (col(k) - col(k - 1))) / (h1 * h2 * (h1 + h2));
        }
        return s.withSpectra(std::move(out));
    }

    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h1 = x[k] - x[k - 1], h2 = x[k + 1] - x[k];
        out.col(static_cast<Eigen::Index>(k)) =
            2.0 * ((col(k + 1) - col(k)) / h2 - (col(k) - col(k - 1)) / h1) / (h1 + h2);
    }
    // The one-sided three-point second difference at an edge equals the
    // interior value of its neighbor.
    out.col(0) = out.col(1);
    out.col(static_cast<Eigen::Index>(n - 1)) = out.col(static_cast<Eigen::Index>(n - 2));
    return s.withSpectra(std::move(out));
}

}  // namespace specwb
