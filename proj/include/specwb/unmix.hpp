#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "specwb/speclib.hpp"

namespace specwb {

/// Endmember spectra (one per row). Names come from the SI column "name"
/// when present, otherwise em1, em2, ...
class EndmemberSet {
public:
    explicit EndmemberSet(Speclib spectra);

    const Speclib& spectra() const { return spectra_; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

private:
    Speclib spectra_;
    std::vector<std::string> names_;
};

enum class UnmixConstraints { None, SumToOne, NonNeg, Full };

UnmixConstraints parseUnmixConstraints(const std::string& name);  // none | sum_to_one | nonneg | full

struct AbundanceResult {
    std::vector<std::string> names;
    std::vector<std::int64_t> ids;
    Matrix abundances;  // samples x endmembers
    std::vector<double> rmse;
};

/// Least-squares abundances per spectrum.
///   none        unconstrained, rank-deficient endmembers are an error
///   sum_to_one  abundances sum to 1 (exact elimination)
///   nonneg      abundances >= 0 (Lawson-Hanson)
///   full        both; the sum row is appended with weight 1e6 and solved by
///               NNLS, then refined exactly on the positive set
AbundanceResult unmix(const Speclib& s, const EndmemberSet& em, UnmixConstraints constraints, unsigned threads = 1);

/// min ||A x - b|| subject to x >= 0.
Vector nnls(const Matrix& a, const Vector& b);

/// id, one column per endmember, rmse.
void writeAbundances(const AbundanceResult& result, std::ostream& out);

}  // namespace specwb
