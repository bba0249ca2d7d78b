#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "specwb/io.hpp"
#include "specwb/nri.hpp"

namespace specwb {

GlmStatistic parseGlmStatistic(const std::string& name) {
    if (name == "coefficient") return GlmStatistic::Coefficient;
    if (name == "z.value") return GlmStatistic::ZValue;
    if (name == "p.value") return GlmStatistic::PValue;
    throw Error("unknown statistic '" + name + "'; valid names: coefficient, z.value, p.value");
}

double statisticValue(const GlmStats& s, GlmStatistic statistic) {
    switch (statistic) {
        case GlmStatistic::Coefficient: return s.coefficient;
        case GlmStatistic::ZValue: return s.z_value;
        case GlmStatistic::PValue: return s.p_value;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double rampPosition(double value, double lo, double hi, bool log_scale) {
    if (log_scale) {
        value = std::log10(value);
        lo = std::log10(lo);
        hi = std::log10(hi);
    }
    if (!std::isfinite(value)) return std::numeric_limits<double>::quiet_NaN();
    if (hi == lo) return 0.5;
    return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

Rgb rampColor(double t) {
    static constexpr std::array<std::array<double, 3>, 5> stops = {{
        {48, 18, 59}, {40, 120, 230}, {60, 200, 120}, {250, 200, 40}, {180, 20, 10},
    }};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(k);
    Rgb c{};
    unsigned char* ch[3] = {&c.r, &c.g, &c.b};
    for (int i = 0; i < 3; ++i)
        *ch[i] = static_cast<unsigned char>(std::lround(stops[k][i] + f * (stops[k + 1][i] - stops[k][i])));
    return c;
}

CorrelogramSummary correlogramExport(const GlmGrid& grid, GlmStatistic statistic, bool log_scale,
                                     const std::filesystem::path& csv_path, const std::filesystem::path& ppm_path,
                                     int cell_pixels) {
    const std::size_t b = grid.grid.size();
    const auto& wl = grid.grid.centers;
    if (grid.stats.size() != b * (b - 1) / 2) throw Error("correlogram: statistics do not match the grid");
    if (cell_pixels < 1) throw Error("correlogram: cell size must be positive");

    auto plotted = [&](const GlmStats& s) {
        const double v = statisticValue(s, statistic);
        return log_scale && !(v > 0) ? std::numeric_limits<double>::quiet_NaN() : v;
    };

    CorrelogramSummary sum;
    bool any_value = false, any_p = false;
    for (std::size_t i = 1; i < b; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const GlmStats& s = grid.stats[pairIndex(i, j)];
            const double v = plotted(s);
            if (std::isfinite(v)) {
                sum.min_value = any_value ? std::min(sum.min_value, v) : v;
                sum.max_value = any_value ? std::max(sum.max_value, v) : v;
                any_value = true;
            }
            if (std::isfinite(s.p_value)) {
                const PairRank r{{i, j}, wl[i], wl[j], s.p_value};
                if (!any_p || s.p_value < sum.best.p_value) sum.best = r;
                if (!any_p || s.p_value > sum.worst.p_value) sum.worst = r;
                any_p = true;
            }
        }
    }
    if (!any_value) throw Error("correlogram: every value of the statistic is NaN");
    if (!any_p) {
        sum.best.p_value = sum.worst.p_value = std::numeric_limits<double>::quiet_NaN();
    }

    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot write " + csv_path.string());
    csv << "wl_i,wl_j,value\n";
    for (std::size_t i = 1; i < b; ++i)
        for (std::size_t j = 0; j < i; ++j)
            csv << formatNumber(wl[i]) << ',' << formatNumber(wl[j]) << ','
                << formatNumber(statisticValue(grid.stats[pairIndex(i, j)], statistic)) << '\n';
    if (!csv) throw Error("write failed: " + csv_path.string());

    const std::size_t side = b * static_cast<std::size_t>(cell_pixels);
    std::vector<unsigned char> pixels(side * side * 3, 0);
    for (std::size_t i = 1; i < b; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double v = plotted(grid.stats[pairIndex(i, j)]);
            const Rgb c = std::isfinite(v) ? rampColor(rampPosition(v, sum.min_value, sum.max_value, log_scale))
                                           : Rgb{128, 128, 128};
            for (int dy = 0; dy < cell_pixels; ++dy) {
                for (int dx = 0; dx < cell_pixels; ++dx) {
                    const std::size_t px = ((i * cell_pixels + dy) * side + j * cell_pixels + dx) * 3;
                    pixels[px] = c.r;
                    pixels[px + 1] = c.g;
                    pixels[px + 2] = c.b;
                }
            }
        }
    }
    std::ofstream ppm(ppm_path, std::ios::binary);
    if (!ppm) throw Error("cannot write " + ppm_path.string());
    ppm << "P6\n" << side << ' ' << side << "\n255\n";
    ppm.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!ppm) throw Error("write failed: " + ppm_path.string());
    return sum;
}

void writeGlmTable(const GlmGrid& grid, std::ostream& out) {
    const auto& wl = grid.grid.centers;
    out << "wl_i,wl_j,intercept,coefficient,se_intercept,se_coefficient,z_value,p_value,deviance,iterations,"
           "converged,separated\n";
    for (std::size_t i = 1; i < wl.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const GlmStats& s = grid.stats[pairIndex(i, j)];
            out << formatNumber(wl[i]) << ',' << formatNumber(wl[j]) << ',' << formatNumber(s.intercept) << ','
                << formatNumber(s.coefficient) << ',' << formatNumber(s.se_intercept) << ','
                << formatNumber(s.se_coefficient) << ',' << formatNumber(s.z_value) << ','
                << formatNumber(s.p_value) << ',' << formatNumber(s.deviance) << ',' << s.iterations << ','
                << (s.converged ? 1 : 0) << ',' << (s.separated ? 1 : 0) << '\n';
        }
    }
}

}  // namespace specwb
