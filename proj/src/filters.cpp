#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>

#include "specwb/preprocess.hpp"

namespace specwb {

namespace {

// One output band as a weighted sum over a contiguous run of input bands.
struct StencilRow {
    std::size_t first = 0;
    std::vector<double> weights;
};

using Stencil = std::vector<StencilRow>;

std::size_t reflectIndex(long idx, long n) {
    while (idx < 0 || idx >= n) {
        if (idx < 0) idx = -idx - 1;
        if (idx >= n) idx = 2 * n - idx - 1;
    }
    return static_cast<std::size_t>(idx);
}

Matrix applyStencil(const Matrix& in, const Stencil& stencil) {
    Matrix out(in.rows(), in.cols());
    for (std::size_t k = 0; k < stencil.size(); ++k) {
        const auto& row = stencil[k];
        Vector acc = Vector::Zero(in.rows());
        for (std::size_t j = 0; j < row.weights.size(); ++j)
            acc += row.weights[j] * in.col(static_cast<Eigen::Index>(row.first + j));
        out.col(static_cast<Eigen::Index>(k)) = acc;
    }
    return out;
}

Stencil savitzkyGolayStencil(std::size_t bands, int window, int order) {
    const std::size_t n = static_cast<std::size_t>(window);
    const int half = window / 2;
    Stencil stencil(bands);
    const auto center = savitzkyGolayCoefficients(window, order, 0);
    for (std::size_t k = 0; k < bands; ++k) {
        if (k >= static_cast<std::size_t>(half) && k + half < bands) {
            stencil[k] = {k - half, center};
        } else if (k < static_cast<std::size_t>(half)) {
            stencil[k] = {0, savitzkyGolayCoefficients(window, order, static_cast<int>(k) - half)};
        } else {
            const std::size_t first = bands - n;
            stencil[k] = {first, savitzkyGolayCoefficients(window, order, static_cast<int>(k - first) - half)};
        }
    }
    return stencil;
}

// Moving average; reflected indices are folded back onto real bands so the
// stencil stays contiguous.
Matrix meanFilter(const Matrix& in, int window) {
    const long n = in.cols();
    const int half = window / 2;
    Matrix out(in.rows(), in.cols());
    for (long k = 0; k < n; ++k) {
        Vector acc = Vector::Zero(in.rows());
        for (long j = k - half; j <= k + half; ++j) acc += in.col(static_cast<Eigen::Index>(reflectIndex(j, n)));
        out.col(k) = acc / static_cast<double>(window);
    }
    return out;
}

Stencil lowessStencil(const std::vector<double>& x, double fraction) {
    const std::size_t n = x.size();
    const std::size_t q = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))),
                                                  std::min<std::size_t>(2, n), n);
    Stencil stencil(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Grow the neighborhood [lo, hi] by nearest distance until it has q points.
        std::size_t lo = i, hi = i;
        while (hi - lo + 1 < q) {
            if (lo == 0)
                ++hi;
            else if (hi == n - 1)
                --lo;
            else if (x[i] - x[lo - 1] <= x[hi + 1] - x[i])
                --lo;
            else
                ++hi;
        }
        const double h = std::max(x[i] - x[lo], x[hi] - x[i]);
        std::vector<double> w(hi - lo + 1, 0.0);
        if (h <= 0) {
            w[i - lo] = 1.0;
            stencil[i] = {lo, w};
            continue;
        }
        double sw = 0, swx = 0;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double u = std::abs(x[j] - x[i]) / h;
            const double t = u < 1 ? 1 - u * u * u : 0;
            w[j - lo] = t * t * t;
            sw += w[j - lo];
            swx += w[j - lo] * x[j];
        }
        const double xbar = swx / sw;
        double sxx = 0;
        for (std::size_t j = lo; j <= hi; ++j) sxx += w[j - lo] * (x[j] - xbar) * (x[j] - xbar);
        std::vector<double> coef(w.size());
        // Weighted linear fit evaluated at x[i]; falls back to the weighted mean
        // when only one point carries weight.
        const bool flat = sxx <= 1e-12 * h * h * sw;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double base = w[j - lo] / sw;
            coef[j - lo] = flat ? base : base + w[j - lo] * (x[j] - xbar) * (x[i] - xbar) / sxx;
        }
        stencil[i] = {lo, coef};
    }
    return stencil;
}

// Reinsch form of the cubic smoothing spline on unit-spaced knots:
// (R + a Q'Q) g = Q'y, fitted = y - a Q g.
Matrix splineFilter(const Matrix& in, int window) {
    const Eigen::Index n = in.cols();
    const double alpha = std::pow(window / 3.7909, 4);
    const Eigen::Index m = n - 2;
    using SpMat = Eigen::SparseMatrix<double>;
    SpMat q(n, m), r(m, m);
    std::vector<Eigen::Triplet<double>> tq, tr;
    for (Eigen::Index j = 0; j < m; ++j) {
        tq.emplace_back(j, j, 1.0);
        tq.emplace_back(j + 1, j, -2.0);
        tq.emplace_back(j + 2, j, 1.0);
        tr.emplace_back(j, j, 2.0 / 3.0);
        if (j + 1 < m) {
            tr.emplace_back(j, j + 1, 1.0 / 6.0);
            tr.emplace_back(j + 1, j, 1.0 / 6.0);
        }
    }
    q.setFromTriplets(tq.begin(), tq.end());
    r.setFromTriplets(tr.begin(), tr.end());
    SpMat system = r + alpha * SpMat(q.transpose() * q);
    Eigen::SimplicialLDLT<SpMat> solver(system);
    if (solver.info() != Eigen::Success) throw Error("spline filter: factorization failed");

    Matrix out(in.rows(), n);
    for (Eigen::Index row = 0; row < in.rows(); ++row) {
        const Vector y = in.row(row).transpose();
        const Vector gamma = solver.solve(q.transpose() * y);
        out.row(row) = (y - alpha * (q * gamma)).transpose();
    }
    return out;
}

}  // namespace

FilterMethod parseFilterMethod(const std::string& name) {
    if (name == "sgolay" || name == "savitzky_golay") return FilterMethod::SavitzkyGolay;
    if (name == "mean") return FilterMethod::Mean;
    if (name == "lowess") return FilterMethod::Lowess;
    if (name == "spline") return FilterMethod::Spline;
    throw Error("unknown filter method '" + name + "' (expected sgolay, mean, lowess or spline)");
}

void FilterSpec::validate() const {
    if (method == FilterMethod::Lowess) {
        if (!(fraction > 0 && fraction <= 1)) throw Error("lowess fraction must be in (0, 1]");
        return;
    }
    if (window < 3) throw Error("filter window must be >= 3");
    if (window % 2 == 0) throw Error("filter window must be odd");
    if (method == FilterMethod::SavitzkyGolay && (poly_order < 0 || poly_order >= window))
        throw Error("Savitzky-Golay order must be in [0, window)");
}

std::vector<double> savitzkyGolayCoefficients(int window, int poly_order, int position) {
    const int half = window / 2;
    if (position < -half || position > half) throw Error("Savitzky-Golay position outside the window");
    // Positions scaled to [-1, 1] keep the Vandermonde system well conditioned.
    const double scale = half > 0 ? static_cast<double>(half) : 1.0;
    Matrix a(window, poly_order + 1);
    for (int j = 0; j < window; ++j) {
        const double u = (j - half) / scale;
        double p = 1;
        for (int c = 0; c <= poly_order; ++c, p *= u) a(j, c) = p;
    }
    Vector v(poly_order + 1);
    double p = 1;
    for (int c = 0; c <= poly_order; ++c, p *= position / scale) v(c) = p;
    // c = A (A'A)^-1 v, solved through QR of A.
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix rmat = qr.matrixQR().topRows(poly_order + 1).triangularView<Eigen::Upper>();
    const Vector z1 = rmat.transpose().triangularView<Eigen::Lower>().solve(v);
    const Vector z = rmat.triangularView<Eigen::Upper>().solve(z1);
    const Vector c = a * z;
    return {c.data(), c.data() + c.size()};
}

Speclib noiseFilter(const Speclib& s, const FilterSpec& spec) {
    spec.validate();
    const std::size_t bands = s.bands();
    if (spec.method != FilterMethod::Lowess && static_cast<std::size_t>(spec.window) > bands)
        throw Error("filter window " + std::to_string(spec.window) + " exceeds band count " + std::to_string(bands));
    switch (spec.method) {
        case FilterMethod::SavitzkyGolay:
            return s.withSpectra(applyStencil(s.spectra(), savitzkyGolayStencil(bands, spec.window, spec.poly_order)));
        case FilterMethod::Mean: return s.withSpectra(meanFilter(s.spectra(), spec.window));
        case FilterMethod::Lowess: return s.withSpectra(applyStencil(s.spectra(), lowessStencil(s.wavelengths(), spec.fraction)));
        case FilterMethod::Spline: return s.withSpectra(splineFilter(s.spectra(), spec.window));
    }
    return s;
}

}  // namespace specwb
