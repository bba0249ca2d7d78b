#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specwb/speclib.hpp"

namespace specwb {

// ---------------------------------------------------------------------------
// Band-math expressions
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := base ('^' factor)?
//   base   := number | R<nm> | D1<nm> | D2<nm> | '(' expr ')'
//
// R<nm> is the value at the band nearest <nm>; D1/D2 the first/second
// derivative there.
// ---------------------------------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t position)
        : Error(message + " at position " + std::to_string(position)), position_(position) {}

    /// 1-based character position; one past the end for premature end of input.
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

enum class BandSource { Reflectance, FirstDerivative, SecondDerivative };

struct IndexNode;
using IndexNodePtr = std::shared_ptr<const IndexNode>;

struct NumberNode {
    double value;
};
struct BandNode {
    BandSource source;
    double wavelength;
};
struct BinaryNode {
    char op;  // + - * / ^
    IndexNodePtr lhs;
    IndexNodePtr rhs;
};

struct IndexNode {
    std::variant<NumberNode, BandNode, BinaryNode> value;
};

class IndexExpr {
public:
    explicit IndexExpr(IndexNodePtr root) : root_(std::move(root)) {}

    const IndexNode& root() const { return *root_; }

    /// Minimal-parenthesis rendering that parses back to the same tree.
    std::string toString() const;

    /// Every band reference in the tree, in evaluation order.
    std::vector<BandNode> bands() const;

    bool operator==(const IndexExpr& other) const;

private:
    IndexNodePtr root_;
};

IndexExpr parseIndex(const std::string& text);

struct IndexValues {
    std::vector<double> values;       // one per spectrum
    std::size_t division_by_zero = 0;  // spectra that hit a zero denominator (value NaN)
};

/// Band references must lie within [first center - fwhm/2, last center + fwhm/2].
IndexValues evalIndex(const IndexExpr& expr, const Speclib& s);

struct CatalogEntry {
    std::string name;
    std::string formula;
    std::string description;
};

const std::vector<CatalogEntry>& vegetationIndexCatalog();
const std::vector<CatalogEntry>& soilIndexCatalog();

IndexValues vegindex(const Speclib& s, const std::string& name);
IndexValues soilindex(const Speclib& s, const std::string& name);

// ---------------------------------------------------------------------------
// Red edge
// ---------------------------------------------------------------------------

enum class RedEdgeMethod { GaussianFit, LinearExtrapolation, LinearInterpolation };

RedEdgeMethod parseRedEdgeMethod(const std::string& name);
std::string redEdgeMethodName(RedEdgeMethod method);

struct RedEdgeResult {
    RedEdgeMethod method = RedEdgeMethod::LinearInterpolation;
    double reip = 0;            // nm; NaN when the spectrum failed
    bool in_expected_range = false;  // 680 <= reip <= 760
    std::string error;          // empty on success
    // gaussian_fit: lambda0, sigma, rs, r0, iterations
    // linear_extrapolation: far_red_slope, far_red_intercept, nir_slope, nir_intercept
    std::map<std::string, double> auxiliary;

    bool ok() const { return error.empty(); }
};

/// One spectrum; throws Error on failure ("no red edge", non-convergence,
/// missing coverage).
RedEdgeResult redEdgeSpectrum(const std::vector<double>& wavelengths, const std::vector<double>& values,
                              RedEdgeMethod method);

/// Every spectrum; failures are reported per result rather than thrown.
/// Throws only when the grid does not cover 660-800 nm.
std::vector<RedEdgeResult> redEdge(const Speclib& s, RedEdgeMethod method);

}  // namespace specwb
