#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "specwb/io.hpp"
#include "specwb/nri.hpp"

namespace specwb {

namespace {

enum class ColumnCheck { Ok, HasNaN, Constant };

ColumnCheck check(const Eigen::Ref<const Vector>& c) {
    if (c.hasNaN()) return ColumnCheck::HasNaN;
    if (c.size() == 0 || (c.array() == c(0)).all()) return ColumnCheck::Constant;
    return ColumnCheck::Ok;
}

struct Builder {
    MlDataset& ds;
    std::vector<Vector> columns;

    void add(const std::string& name, Vector column) {
        switch (check(column)) {
            case ColumnCheck::HasNaN: ++ds.dropped_nan; return;
            case ColumnCheck::Constant: ++ds.dropped_constant; return;
            case ColumnCheck::Ok: break;
        }
        ds.predictor_names.push_back(name);
        columns.push_back(std::move(column));
    }

    void finish(Eigen::Index rows) {
        ds.predictors.resize(rows, static_cast<Eigen::Index>(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c) ds.predictors.col(static_cast<Eigen::Index>(c)) = columns[c];
    }
};

double parseCell(const std::string& text) {
    if (text.empty() || text == "NA" || text == "NaN" || text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw Error("non-numeric predictor value '" + text + "'");
    return v;
}

}  // namespace

MlDataset buildMlDataset(const NriCube& cube, const std::string& response,
                         const std::vector<std::string>& extra_predictors) {
    MlDataset ds;
    ds.response_name = response;
    ds.response = cube.si().column(response);
    ds.ids = cube.ids();
    const Eigen::Index n = static_cast<Eigen::Index>(cube.samples());
    Builder b{ds, {}};
    const auto& wl = cube.grid().centers;
    for (std::size_t p = 0; p < cube.pairs(); ++p) {
        const BandPair bp = cube.pair(p);
        b.add(nriColumnName(wl[bp.i], wl[bp.j]), cube.values().col(static_cast<Eigen::Index>(p)));
    }
    for (const auto& name : extra_predictors) {
        if (name == response) throw Error("predictor '" + name + "' is the response");
        const SiColumn& col = cube.si().column(name);
        if (col.isNumeric()) {
            b.add(name, Eigen::Map<const Vector>(col.numbers().data(), n));
            continue;
        }
        const auto levels = col.levels();
        for (std::size_t l = 1; l < levels.size(); ++l) {
            Vector indicator(n);
            for (Eigen::Index k = 0; k < n; ++k)
                indicator(k) = col.labels()[static_cast<std::size_t>(k)] == levels[l] ? 1.0 : 0.0;
            b.add(name + "=" + levels[l], std::move(indicator));
        }
    }
    b.finish(n);
    return ds;
}

Matrix pearsonMatrix(const Matrix& columns) {
    const Matrix centered = columns.rowwise() - columns.colwise().mean();
    const Vector norms = centered.colwise().norm();
    Matrix r = centered.transpose() * centered;
    for (Eigen::Index a = 0; a < r.rows(); ++a)
        for (Eigen::Index c = 0; c < r.cols(); ++c) r(a, c) /= norms(a) * norms(c);
    return r;
}

MlDataset correlationCutoffFilter(const MlDataset& dataset, double cutoff) {
    if (!(cutoff > 0 && cutoff <= 1)) throw Error("correlation cutoff must lie in (0, 1]");
    const Matrix r = pearsonMatrix(dataset.predictors).cwiseAbs().unaryExpr([](double v) {
        return std::isnan(v) ? 0.0 : v;
    });
    const auto& names = dataset.predictor_names;
    std::vector<Eigen::Index> keep(names.size());
    for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = static_cast<Eigen::Index>(k);

    auto meanAbs = [&](Eigen::Index a) {
        double s = 0;
        for (Eigen::Index o : keep)
            if (o != a) s += r(a, o);
        return s / static_cast<double>(keep.size() - 1);
    };

    while (keep.size() > 1) {
        double worst = -1;
        Eigen::Index wa = 0, wb = 0;
        for (std::size_t x = 0; x < keep.size(); ++x)
            for (std::size_t y = x + 1; y < keep.size(); ++y)
                if (r(keep[x], keep[y]) > worst) worst = r(keep[x], keep[y]), wa = keep[x], wb = keep[y];
        if (worst < cutoff) break;
        const double ma = meanAbs(wa), mb = meanAbs(wb);
        Eigen::Index drop;
        if (ma != mb) {
            drop = ma > mb ? wa : wb;
        } else {
            drop = names[static_cast<std::size_t>(wa)] > names[static_cast<std::size_t>(wb)] ? wa : wb;
        }
        keep.erase(std::find(keep.begin(), keep.end(), drop));
    }

    MlDataset out = dataset;
    out.predictor_names.clear();
    out.predictors.resize(dataset.predictors.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.predictor_names.push_back(names[static_cast<std::size_t>(keep[k])]);
        out.predictors.col(static_cast<Eigen::Index>(k)) = dataset.predictors.col(keep[k]);
    }
    return out;
}

void writeMlDataset(const MlDataset& dataset, std::ostream& out) {
    out << quoteCsvField(dataset.response_name);
    for (const auto& name : dataset.predictor_names) out << ',' << quoteCsvField(name);
    out << '\n';
    for (Eigen::Index k = 0; k < dataset.predictors.rows(); ++k) {
        const SiCell cell = dataset.response.cell(static_cast<std::size_t>(k));
        if (const auto* d = std::get_if<double>(&cell)) {
            out << formatNumber(*d);
        } else {
            out << quoteCsvField(std::get<std::string>(cell));
        }
        for (Eigen::Index c = 0; c < dataset.predictors.cols(); ++c) out << ',' << formatNumber(dataset.predictors(k, c));
        out << '\n';
    }
}

MlDataset readMlDataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("empty ML matrix");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = splitCsvLine(line);
    if (header.empty() || header.front().empty()) throw Error("ML matrix header is missing the response column");
    std::vector<std::string> response;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = splitCsvLine(line);
        if (cells.size() != header.size())
            throw Error("ML matrix row " + std::to_string(rows.size() + 1) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(header.size()));
        response.push_back(cells.front());
        std::vector<double> values;
        for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parseCell(cells[c]));
        rows.push_back(std::move(values));
    }
    MlDataset ds;
    ds.response_name = header.front();
    ds.response = SiColumn::infer(header.front(), response);
    ds.predictor_names.assign(header.begin() + 1, header.end());
    ds.predictors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        ds.ids.push_back(static_cast<std::int64_t>(k + 1));
        for (std::size_t c = 0; c < rows[k].size(); ++c)
            ds.predictors(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = rows[k][c];
    }
    return ds;
}

MlExportSummary exportMlMatrix(const NriCube& cube, const std::string& response,
                               const std::vector<std::string>& extra_predictors, const std::filesystem::path& path) {
    const MlDataset ds = buildMlDataset(cube, response, extra_predictors);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    writeMlDataset(ds, out);
    if (!out) throw Error("write failed: " + path.string());
    return {ds.predictor_names.size(), ds.dropped_nan, ds.dropped_constant};
}

}  // namespace specwb
