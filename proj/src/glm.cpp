#include <cmath>
#include <limits>

#include "specwb/nri.hpp"
#include "specwb/parallel.hpp"

namespace specwb {

namespace {

constexpr int kMaxIterations = 50;
constexpr double kDevianceTolerance = 1e-10;
constexpr double kSeparationBeta = 30;
constexpr double kZeroDeviance = 1e-8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double binomialDeviance(const std::vector<double>& x, const std::vector<double>& y, double b0, double b1) {
    double dev = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double eta = b0 + b1 * x[k];
        dev += y[k] == 1 ? softplus(-eta) : softplus(eta);
    }
    return 2 * dev;
}

struct Information {
    double a = 0, b = 0, c = 0;  // [[a, b], [b, c]] = X'WX
    double det() const { return a * c - b * b; }
    bool singular() const { return !(std::isfinite(det()) && det() > 1e-14 * a * c && a > 0 && c > 0); }
};

Information information(const std::vector<double>& x, double b0, double b1) {
    Information info;
    for (double xk : x) {
        const double mu = 1 / (1 + std::exp(-(b0 + b1 * xk)));
        const double w = mu * (1 - mu);
        info.a += w;
        info.b += w * xk;
        info.c += w * xk * xk;
    }
    return info;
}

bool constant(const std::vector<double>& x) {
    for (double v : x)
        if (v != x.front()) return false;
    return true;
}

void setWald(GlmStats& st, const Information& info) {
    const double det = info.det();
    st.se_intercept = std::sqrt(info.c / det);
    st.se_coefficient = std::sqrt(info.a / det);
    st.z_value = st.coefficient / st.se_coefficient;
    st.p_value = twoSidedNormalP(st.z_value);
}

GlmStats fitBinomial(const std::vector<double>& x, const std::vector<double>& y, std::vector<double>* trace) {
    GlmStats st;
    if (constant(x)) return st;
    double b0 = 0, b1 = 0;
    double dev = binomialDeviance(x, y, b0, b1);
    if (trace) trace->push_back(dev);
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        st.iterations = iter;
        const Information info = information(x, b0, b1);
        if (info.singular()) {
            st.separated = true;
            break;
        }
        double g0 = 0, g1 = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double r = y[k] - 1 / (1 + std::exp(-(b0 + b1 * x[k])));
            g0 += r;
            g1 += r * x[k];
        }
        const double det = info.det();
        double d0 = (info.c * g0 - info.b * g1) / det;
        double d1 = (info.a * g1 - info.b * g0) / det;

        double next = binomialDeviance(x, y, b0 + d0, b1 + d1);
        for (int h = 0; h < 30 && !(next <= dev); ++h) {
            d0 /= 2;
            d1 /= 2;
            next = binomialDeviance(x, y, b0 + d0, b1 + d1);
        }
        if (!(next <= dev)) {
            if (std::abs(next - dev) < kDevianceTolerance) {
                st.converged = true;
            } else {
                st.separated = true;
            }
            break;
        }
        b0 += d0;
        b1 += d1;
        const double change = dev - next;
        dev = next;
        if (trace) trace->push_back(dev);
        if (std::abs(b0) > kSeparationBeta || std::abs(b1) > kSeparationBeta || dev < kZeroDeviance) {
            st.separated = true;
            break;
        }
        if (change < kDevianceTolerance) {
            st.converged = true;
            break;
        }
    }
    st.intercept = b0;
    st.coefficient = b1;
    st.deviance = dev;
    if (st.converged) setWald(st, information(x, b0, b1));
    return st;
}

GlmStats fitGaussian(const std::vector<double>& x, const std::vector<double>& y) {
    GlmStats st;
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sxx += (x[k] - mx) * (x[k] - mx), sxy += (x[k] - mx) * (y[k] - my);
    if (sxx == 0) return st;
    st.coefficient = sxy / sxx;
    st.intercept = my - st.coefficient * mx;
    double rss = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double e = y[k] - st.intercept - st.coefficient * x[k];
        rss += e * e;
    }
    const double s2 = rss / (n - 2);
    st.deviance = rss;
    st.se_coefficient = std::sqrt(s2 / sxx);
    st.se_intercept = std::sqrt(s2 * (1 / n + mx * mx / sxx));
    st.z_value = st.coefficient / st.se_coefficient;
    st.p_value = twoSidedNormalP(st.z_value);
    st.iterations = 1;
    st.converged = true;
    return st;
}

void validateResponse(const std::vector<double>& y, GlmFamily family) {
    if (y.size() < 3) throw Error("glm needs at least 3 samples, got " + std::to_string(y.size()));
    for (double v : y) {
        if (std::isnan(v)) throw Error("glm response contains missing values");
        if (family == GlmFamily::Binomial && v != 0 && v != 1)
            throw Error("binomial response must be 0 or 1");
    }
}

}  // namespace

GlmFamily parseGlmFamily(const std::string& name) {
    if (name == "binomial") return GlmFamily::Binomial;
    if (name == "gaussian") return GlmFamily::Gaussian;
    throw Error("unknown GLM family '" + name + "' (expected binomial or gaussian)");
}

double normalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double twoSidedNormalP(double z) {
    if (std::isnan(z)) return kNaN;
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

GlmStats fitGlm(const std::vector<double>& x, const std::vector<double>& y, GlmFamily family) {
    if (x.size() != y.size()) throw Error("glm: predictor and response lengths differ");
    validateResponse(y, family);
    for (double v : x)
        if (std::isnan(v)) return GlmStats{};
    return family == GlmFamily::Binomial ? fitBinomial(x, y, nullptr) : fitGaussian(x, y);
}

std::vector<double> binomialDevianceTrace(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("glm: predictor and response lengths differ");
    validateResponse(y, GlmFamily::Binomial);
    std::vector<double> trace;
    fitBinomial(x, y, &trace);
    return trace;
}

GlmGrid glmNri(const NriCube& cube, const std::vector<double>& response, GlmFamily family, unsigned threads) {
    if (response.size() != cube.samples())
        throw Error("glm: response has " + std::to_string(response.size()) + " values for " +
                    std::to_string(cube.samples()) + " samples");
    validateResponse(response, family);
    GlmGrid out;
    out.grid = cube.grid();
    out.family = family;
    out.stats.resize(cube.pairs());
    const Matrix& v = cube.values();
    parallelFor(cube.pairs(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(cube.samples());
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < x.size(); ++k)
                x[k] = v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
            out.stats[p] = fitGlm(x, response, family);
        }
    });
    return out;
}

GlmGrid glmNri(const NriCube& cube, const std::string& response_column, GlmFamily family, unsigned threads) {
    const SiColumn& col = cube.si().column(response_column);
    if (!col.isNumeric()) throw Error("glm response column '" + response_column + "' is not numeric");
    return glmNri(cube, col.numbers(), family, threads);
}

}  // namespace specwb
