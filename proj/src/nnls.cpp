#include <algorithm>
#include <cmath>
#include <limits>

#include "specwb/unmix.hpp"

namespace specwb {

namespace {

Vector solvePassive(const Matrix& a, const Vector& b, const std::vector<bool>& passive) {
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < passive.size(); ++j)
        if (passive[j]) cols.push_back(static_cast<Eigen::Index>(j));
    Matrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
    const Vector z = sub.colPivHouseholderQr().solve(b);
    Vector s = Vector::Zero(a.cols());
    for (std::size_t k = 0; k < cols.size(); ++k) s(cols[k]) = z(static_cast<Eigen::Index>(k));
    return s;
}

}  // namespace

Vector nnls(const Matrix& a, const Vector& b) {
    if (a.rows() != b.size()) throw Error("nnls: dimension mismatch");
    const Eigen::Index n = a.cols();
    const double tol = 10 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().colwise().sum().maxCoeff() *
                       static_cast<double>(std::max(a.rows(), n));
    Vector x = Vector::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    Vector w = a.transpose() * (b - a * x);

    std::vector<bool> rejected(static_cast<std::size_t>(n), false);
    for (int outer = 0; outer < 30 * static_cast<int>(n) + 30; ++outer) {
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && !rejected[static_cast<std::size_t>(j)] && w(j) > tol &&
                (best < 0 || w(j) > w(best)))
                best = j;
        if (best < 0) return x;
        passive[static_cast<std::size_t>(best)] = true;

        // A column that cannot enter with a positive coefficient is skipped
        // until the solution moves.
        if (solvePassive(a, b, passive)(best) <= 0) {
            passive[static_cast<std::size_t>(best)] = false;
            rejected[static_cast<std::size_t>(best)] = true;
            continue;
        }
        std::fill(rejected.begin(), rejected.end(), false);

        for (int inner = 0; inner <= n; ++inner) {
            const Vector s = solvePassive(a, b, passive);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && s(j) <= 0) feasible = false;
            if (feasible) {
                x = s;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && s(j) <= 0)
                    alpha = std::min(alpha, x(j) > s(j) ? x(j) / (x(j) - s(j)) : 0.0);
            x += alpha * (s - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0;
                }
            }
        }
        w = a.transpose() * (b - a * x);
    }
    return x;
}

}  // namespace specwb
