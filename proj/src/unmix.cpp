#include <cmath>

#include "specwb/io.hpp"
#include "specwb/parallel.hpp"
#include "specwb/unmix.hpp"

namespace specwb {

namespace {

constexpr double kSumWeight = 1e6;

// min ||A a - r|| with sum(a) == 1 over the selected columns; the others are 0.
// Returns false when the reduced system is rank deficient.
bool sumToOne(const Matrix& a, const Vector& r, const std::vector<Eigen::Index>& cols, Vector& out) {
    out = Vector::Zero(a.cols());
    const Eigen::Index m = static_cast<Eigen::Index>(cols.size());
    if (m == 0) return false;
    const Vector last = a.col(cols.back());
    if (m == 1) {
        out(cols.back()) = 1;
        return true;
    }
    Matrix reduced(a.rows(), m - 1);
    for (Eigen::Index k = 0; k + 1 < m; ++k) reduced.col(k) = a.col(cols[static_cast<std::size_t>(k)]) - last;
    const auto qr = reduced.colPivHouseholderQr();
    if (qr.rank() < m - 1) return false;
    const Vector z = qr.solve(r - last);
    double rest = 1;
    for (Eigen::Index k = 0; k + 1 < m; ++k) {
        out(cols[static_cast<std::size_t>(k)]) = z(k);
        rest -= z(k);
    }
    out(cols.back()) = rest;
    return true;
}

std::vector<Eigen::Index> allColumns(Eigen::Index m) {
    std::vector<Eigen::Index> c(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) c[static_cast<std::size_t>(k)] = k;
    return c;
}

}  // namespace

EndmemberSet::EndmemberSet(Speclib spectra) : spectra_(std::move(spectra)) {
    if (spectra_.samples() == 0) throw Error("endmember set is empty");
    if (spectra_.si().has("name")) {
        const SiColumn& col = spectra_.si().column("name");
        for (std::size_t k = 0; k < col.size(); ++k) names_.push_back(col.cellText(k));
    } else {
        for (std::size_t k = 0; k < spectra_.samples(); ++k) names_.push_back("em" + std::to_string(k + 1));
    }
}

UnmixConstraints parseUnmixConstraints(const std::string& name) {
    if (name == "none") return UnmixConstraints::None;
    if (name == "sum_to_one") return UnmixConstraints::SumToOne;
    if (name == "nonneg") return UnmixConstraints::NonNeg;
    if (name == "full") return UnmixConstraints::Full;
    throw Error("unknown constraints '" + name + "' (expected none, sum_to_one, nonneg or full)");
}

AbundanceResult unmix(const Speclib& s, const EndmemberSet& em, UnmixConstraints constraints, unsigned threads) {
    if (em.spectra().wavelengths() != s.wavelengths())
        throw Error("grid mismatch: endmembers and spectra have different wavelengths (resample first)");
    const Matrix a = em.spectra().spectra().transpose();  // bands x endmembers
    const Eigen::Index m = a.cols();
    const auto cols = allColumns(m);

    Eigen::ColPivHouseholderQR<Matrix> qr;
    if (constraints == UnmixConstraints::None) {
        qr.compute(a);
        if (qr.rank() < m)
            throw Error("rank-deficient endmembers: rank " + std::to_string(qr.rank()) + " for " + std::to_string(m) +
                        " endmembers over " + std::to_string(a.rows()) + " bands");
    }
    if (constraints == UnmixConstraints::SumToOne) {
        Vector probe;
        if (!sumToOne(a, Vector::Zero(a.rows()), cols, probe))
            throw Error("rank-deficient endmembers under the sum-to-one constraint");
    }
    Matrix augmented;
    if (constraints == UnmixConstraints::Full) {
        augmented.resize(a.rows() + 1, m);
        augmented.topRows(a.rows()) = a;
        augmented.row(a.rows()).setConstant(kSumWeight);
    }

    AbundanceResult out;
    out.names = em.names();
    out.ids = s.ids();
    out.abundances.resize(static_cast<Eigen::Index>(s.samples()), m);
    out.rmse.resize(s.samples());
    parallelFor(s.samples(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const Vector r = s.spectra().row(static_cast<Eigen::Index>(k)).transpose();
            Vector x;
            switch (constraints) {
                case UnmixConstraints::None: x = qr.solve(r); break;
                case UnmixConstraints::SumToOne: sumToOne(a, r, cols, x); break;
                case UnmixConstraints::NonNeg: x = nnls(a, r); break;
                case UnmixConstraints::Full: {
                    Vector rhs(a.rows() + 1);
                    rhs << r, kSumWeight;
                    x = nnls(augmented, rhs);
                    std::vector<Eigen::Index> positive;
                    for (Eigen::Index j = 0; j < m; ++j)
                        if (x(j) > 0) positive.push_back(j);
                    Vector exact;
                    if (sumToOne(a, r, positive, exact) && exact.minCoeff() >= 0) x = exact;
                    break;
                }
            }
            out.abundances.row(static_cast<Eigen::Index>(k)) = x.transpose();
            out.rmse[k] = std::sqrt((a * x - r).squaredNorm() / static_cast<double>(a.rows()));
        }
    });
    return out;
}

void writeAbundances(const AbundanceResult& result, std::ostream& out) {
    out << "id";
    for (const auto& n : result.names) out << ',' << quoteCsvField(n);
    out << ",rmse\n";
    for (Eigen::Index k = 0; k < result.abundances.rows(); ++k) {
        out << result.ids[static_cast<std::size_t>(k)];
        for (Eigen::Index j = 0; j < result.abundances.cols(); ++j) out << ',' << formatNumber(result.abundances(k, j));
        out << ',' << formatNumber(result.rmse[static_cast<std::size_t>(k)]) << '\n';
    }
}

}  // namespace specwb
