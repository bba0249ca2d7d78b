#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "specwb/io.hpp"

namespace specwb {

namespace {

constexpr const char* kSiPrefix = "si:";

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::optional<double> parseCell(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty() || t == "NA" || t == "NaN" || t == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::string_view v(t);
    if (v.front() == '+') v.remove_prefix(1);
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
    return out;
}

std::vector<double> parseNumberList(const std::vector<std::string>& cells, std::size_t from,
                                    const std::string& what, std::size_t line_no) {
    std::vector<double> out;
    for (std::size_t k = from; k < cells.size(); ++k) {
        auto v = parseCell(cells[k]);
        if (!v) throw Error("line " + std::to_string(line_no) + ": cannot parse " + what + " '" + cells[k] + "'");
        out.push_back(*v);
    }
    return out;
}

}  // namespace

std::string formatNumber(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<std::string> splitCsvLine(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string quoteCsvField(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Speclib readCsvSpeclib(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return readCsvSpeclib(in, path.string());
}

Speclib readCsvSpeclib(std::istream& in, const std::string& source_name) {
    std::optional<std::vector<double>> fwhm;
    std::vector<MaskRange> mask;
    std::string unit = "reflectance";
    WavelengthUnit wl_unit = WavelengthUnit::Auto;

    bool have_header = false;
    bool has_id = false;
    std::vector<std::size_t> si_cols, band_cols;
    std::vector<std::string> si_names;
    std::vector<double> centers;

    std::vector<std::vector<std::string>> si_raw;
    std::vector<std::vector<double>> rows;
    std::vector<std::int64_t> ids;
    std::size_t header_width = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = splitCsvLine(line);
        if (line[0] == '#') {
            const std::string key = trim(cells[0]);
            if (key == "#fwhm") {
                fwhm = parseNumberList(cells, 1, "fwhm", line_no);
            } else if (key == "#wavelength_unit" && cells.size() > 1) {
                const std::string u = trim(cells[1]);
                if (u == "nm")
                    wl_unit = WavelengthUnit::Nanometer;
                else if (u == "um" || u == "µm")
                    wl_unit = WavelengthUnit::Micrometer;
                else
                    throw Error("line " + std::to_string(line_no) + ": unknown wavelength unit '" + u + "'");
            } else if (key == "#unit" && cells.size() > 1) {
                unit = trim(cells[1]);
            } else if (key == "#mask") {
                auto v = parseNumberList(cells, 1, "mask bound", line_no);
                if (v.size() % 2 != 0) throw Error("line " + std::to_string(line_no) + ": odd mask bound count");
                for (std::size_t k = 0; k < v.size(); k += 2) mask.push_back({v[k], v[k + 1]});
            }
            continue;
        }
        if (!have_header) {
            have_header = true;
            header_width = cells.size();
            for (std::size_t k = 0; k < cells.size(); ++k) {
                const std::string name = trim(cells[k]);
                if (k == 0 && name == "id") {
                    has_id = true;
                } else if (name.rfind(kSiPrefix, 0) == 0) {
                    si_cols.push_back(k);
                    si_names.push_back(name.substr(3));
                } else {
                    auto wl = parseCell(name);
                    if (!wl || std::isnan(*wl))
                        throw Error(source_name + ":" + std::to_string(line_no) + ": unparsable wavelength header '" +
                                    name + "'");
                    band_cols.push_back(k);
                    centers.push_back(*wl);
                }
            }
            si_raw.resize(si_cols.size());
            continue;
        }
        if (cells.size() != header_width)
            throw Error(source_name + ":" + std::to_string(line_no) + ": ragged row (" + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(header_width) + ")");
        if (has_id) {
            auto v = parseCell(cells[0]);
            if (!v || std::isnan(*v))
                throw Error(source_name + ":" + std::to_string(line_no) + ": bad id '" + cells[0] + "'");
            ids.push_back(static_cast<std::int64_t>(*v));
        }
        for (std::size_t c = 0; c < si_cols.size(); ++c) si_raw[c].push_back(cells[si_cols[c]]);
        std::vector<double> values;
        values.reserve(band_cols.size());
        for (auto k : band_cols) {
            auto v = parseCell(cells[k]);
            if (!v)
                throw Error(source_name + ":" + std::to_string(line_no) + ": unparsable value '" + cells[k] + "'");
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
    }
    if (!have_header) throw Error(source_name + ": empty file");
    if (centers.empty()) throw Error(source_name + ": no wavelength columns");
    if (rows.empty()) throw Error(source_name + ": no spectra");

    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(centers.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t k = 0; k < centers.size(); ++k)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];

    SiTable si;
    for (std::size_t c = 0; c < si_cols.size(); ++c) si.set(SiColumn::infer(si_names[c], si_raw[c]));

    Speclib s = createSpeclib(std::move(m), std::move(centers), std::move(fwhm), std::move(si), wl_unit);
    return Speclib(s.spectra(), s.grid(), s.si(), MaskRanges(mask), ids, unit);
}

void writeCsvSpeclib(const Speclib& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    writeCsvSpeclib(s, out);
    out.flush();
    if (!out) throw Error("I/O failure writing '" + path.string() + "'");
}

void writeCsvSpeclib(const Speclib& s, std::ostream& out) {
    out << "id";
    for (const auto& c : s.si().columns()) out << ',' << quoteCsvField(kSiPrefix + c.name());
    for (double wl : s.wavelengths()) out << ',' << formatNumber(wl);
    out << '\n';

    out << "#fwhm";
    for (double f : s.fwhm()) out << ',' << formatNumber(f);
    out << '\n';
    out << "#unit," << quoteCsvField(s.valueUnit()) << '\n';
    out << "#wavelength_unit,nm\n";
    if (!s.mask().empty()) {
        out << "#mask";
        for (const auto& r : s.mask().ranges()) out << ',' << formatNumber(r.lo) << ',' << formatNumber(r.hi);
        out << '\n';
    }

    const Matrix& m = s.spectra();
    for (std::size_t i = 0; i < s.samples(); ++i) {
        out << s.ids()[i];
        for (const auto& c : s.si().columns()) out << ',' << quoteCsvField(c.cellText(i));
        for (Eigen::Index k = 0; k < m.cols(); ++k) out << ',' << formatNumber(m(static_cast<Eigen::Index>(i), k));
        out << '\n';
    }
}

}  // namespace specwb
