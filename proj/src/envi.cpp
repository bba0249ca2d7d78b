#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "specwb/io.hpp"

namespace specwb {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::size_t parseCount(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size() || v < 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw Error("ENVI header: bad value for '" + key + "': '" + value + "'");
    }
}

std::vector<double> parseList(const std::string& key, const std::string& value) {
    std::string body = value;
    if (!body.empty() && body.front() == '{') body.erase(body.begin());
    if (!body.empty() && body.back() == '}') body.pop_back();
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error("ENVI header: bad number in '" + key + "': '" + item + "'");
        }
    }
    return out;
}

std::string formatList(const std::vector<double>& values) {
    std::string out = "{";
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out += ", ";
        out += formatNumber(values[k]);
    }
    return out + "}";
}

bool hostIsBigEndian() { return std::endian::native == std::endian::big; }

template <typename T>
T loadValue(const unsigned char* p, bool swap) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, p, sizeof(T));
    if (swap) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

template <typename T>
void storeValue(unsigned char* p, T v, bool swap) {
    std::memcpy(p, &v, sizeof(T));
    if (swap) std::reverse(p, p + sizeof(T));
}

double decode(const unsigned char* p, EnviDataType type, bool swap) {
    switch (type) {
        case EnviDataType::Int16: return loadValue<std::int16_t>(p, swap);
        case EnviDataType::UInt16: return loadValue<std::uint16_t>(p, swap);
        case EnviDataType::Float32: return loadValue<float>(p, swap);
        case EnviDataType::Float64: return loadValue<double>(p, swap);
    }
    return 0;
}

template <typename I>
I toInteger(double v) {
    if (std::isnan(v)) return 0;
    const double r = std::round(v);
    return static_cast<I>(std::clamp(r, static_cast<double>(std::numeric_limits<I>::min()),
                                     static_cast<double>(std::numeric_limits<I>::max())));
}

// Integer types round to nearest and saturate; NaN becomes 0.
void encode(unsigned char* p, double v, EnviDataType type, bool swap) {
    switch (type) {
        case EnviDataType::Int16: storeValue(p, toInteger<std::int16_t>(v), swap); break;
        case EnviDataType::UInt16: storeValue(p, toInteger<std::uint16_t>(v), swap); break;
        case EnviDataType::Float32: storeValue(p, static_cast<float>(v), swap); break;
        case EnviDataType::Float64: storeValue(p, v, swap); break;
    }
}

// Offset (in values) of the first band-value of `line` in the data file and
// the layout of one block of whole lines.
std::size_t valueIndex(const EnviHeader& h, std::size_t line, std::size_t sample, std::size_t band) {
    switch (h.interleave) {
        case Interleave::BSQ: return (band * h.lines + line) * h.samples + sample;
        case Interleave::BIL: return (line * h.bands + band) * h.samples + sample;
        case Interleave::BIP: return (line * h.samples + sample) * h.bands + band;
    }
    return 0;
}

WavelengthGrid gridFromHeader(const EnviHeader& h) {
    if (h.wavelength.empty()) throw Error("ENVI header: missing wavelength");
    WavelengthUnit unit = WavelengthUnit::Auto;
    const std::string u = lower(h.wavelength_units);
    if (u == "nanometers" || u == "nm")
        unit = WavelengthUnit::Nanometer;
    else if (u == "micrometers" || u == "um" || u == "microns")
        unit = WavelengthUnit::Micrometer;
    std::optional<std::vector<double>> fwhm;
    if (!h.fwhm.empty()) fwhm = h.fwhm;
    // Validate and normalize through the regular constructor.
    return createSpeclib(Matrix::Zero(1, static_cast<Eigen::Index>(h.bands)), h.wavelength, fwhm, {}, unit).grid();
}

}  // namespace

std::size_t bytesPerValue(EnviDataType type) {
    switch (type) {
        case EnviDataType::Int16:
        case EnviDataType::UInt16: return 2;
        case EnviDataType::Float32: return 4;
        case EnviDataType::Float64: return 8;
    }
    throw Error("unsupported data type");
}

Interleave parseInterleave(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "bsq") return Interleave::BSQ;
    if (t == "bil") return Interleave::BIL;
    if (t == "bip") return Interleave::BIP;
    throw Error("unknown interleave '" + text + "' (expected bsq, bil or bip)");
}

std::string interleaveName(Interleave interleave) {
    switch (interleave) {
        case Interleave::BSQ: return "bsq";
        case Interleave::BIL: return "bil";
        case Interleave::BIP: return "bip";
    }
    return "bsq";
}

EnviHeader parseEnviHeader(std::istream& in) {
    EnviHeader h;
    std::string line;
    bool magic = false;
    bool have_samples = false, have_lines = false, have_bands = false, have_type = false;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (!magic) {
            if (t.rfind("ENVI", 0) != 0) throw Error("ENVI header: missing 'ENVI' magic line");
            magic = true;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        const std::string raw_key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos) {
                std::string more;
                if (!std::getline(in, more)) throw Error("ENVI header: unterminated '{' for key '" + raw_key + "'");
                value += "\n" + trim(more);
            }
        }
        const std::string key = lower(raw_key);
        if (key == "samples") {
            h.samples = parseCount(key, value);
            have_samples = true;
        } else if (key == "lines") {
            h.lines = parseCount(key, value);
            have_lines = true;
        } else if (key == "bands") {
            h.bands = parseCount(key, value);
            have_bands = true;
        } else if (key == "header offset") {
            h.header_offset = parseCount(key, value);
        } else if (key == "data type") {
            const auto code = parseCount(key, value);
            if (code != 2 && code != 4 && code != 5 && code != 12)
                throw Error("ENVI header: unsupported data type " + std::to_string(code));
            h.data_type = static_cast<EnviDataType>(code);
            have_type = true;
        } else if (key == "interleave") {
            h.interleave = parseInterleave(value);
        } else if (key == "byte order") {
            const auto bo = parseCount(key, value);
            if (bo > 1) throw Error("ENVI header: byte order must be 0 or 1");
            h.byte_order = static_cast<int>(bo);
        } else if (key == "wavelength") {
            h.wavelength = parseList(key, value);
        } else if (key == "fwhm") {
            h.fwhm = parseList(key, value);
        } else if (key == "wavelength units") {
            h.wavelength_units = value;
        } else {
            h.extra.emplace_back(raw_key, value);
        }
    }
    if (!magic) throw Error("ENVI header: empty");
    if (!have_samples || !have_lines || !have_bands) throw Error("ENVI header: samples, lines and bands are required");
    if (!have_type) throw Error("ENVI header: missing data type");
    if (h.samples < 1 || h.lines < 1 || h.bands < 1) throw Error("ENVI header: samples, lines and bands must be >= 1");
    if (!h.wavelength.empty() && h.wavelength.size() != h.bands)
        throw Error("ENVI header: wavelength count " + std::to_string(h.wavelength.size()) + " differs from bands " +
                    std::to_string(h.bands));
    if (!h.fwhm.empty() && h.fwhm.size() != h.bands) throw Error("ENVI header: fwhm count differs from bands");
    return h;
}

EnviHeader readEnviHeader(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open header '" + path.string() + "'");
    return parseEnviHeader(in);
}

std::string formatEnviHeader(const EnviHeader& h) {
    std::ostringstream out;
    out << "ENVI\n";
    out << "samples = " << h.samples << "\n";
    out << "lines = " << h.lines << "\n";
    out << "bands = " << h.bands << "\n";
    out << "header offset = " << h.header_offset << "\n";
    const bool has_file_type = std::any_of(h.extra.begin(), h.extra.end(),
                                           [](const auto& kv) { return lower(kv.first) == "file type"; });
    if (!has_file_type) out << "file type = ENVI Standard\n";
    out << "data type = " << static_cast<int>(h.data_type) << "\n";
    out << "interleave = " << interleaveName(h.interleave) << "\n";
    out << "byte order = " << h.byte_order << "\n";
    if (!h.wavelength_units.empty()) out << "wavelength units = " << h.wavelength_units << "\n";
    if (!h.wavelength.empty()) out << "wavelength = " << formatList(h.wavelength) << "\n";
    if (!h.fwhm.empty()) out << "fwhm = " << formatList(h.fwhm) << "\n";
    for (const auto& [k, v] : h.extra) out << k << " = " << v << "\n";
    return out.str();
}

std::filesystem::path enviHeaderPathFor(const std::filesystem::path& data_path) {
    std::filesystem::path p = data_path;
    if (p.has_extension() && p.extension() != ".hdr") return p.replace_extension(".hdr");
    p += ".hdr";
    return p;
}

// --- reader -----------------------------------------------------------------

EnviCubeReader::EnviCubeReader(const std::filesystem::path& data_path, const std::filesystem::path& header_path)
    : data_path_(data_path), header_(readEnviHeader(header_path)) {
    grid_ = gridFromHeader(header_);
    std::error_code ec;
    const auto size = std::filesystem::file_size(data_path, ec);
    if (ec) throw Error("cannot stat data file '" + data_path.string() + "'");
    if (size != header_.header_offset + header_.dataBytes())
        throw Error("size mismatch: '" + data_path.string() + "' has " + std::to_string(size) + " bytes, header implies " +
                    std::to_string(header_.header_offset + header_.dataBytes()));
    in_.open(data_path, std::ios::binary);
    if (!in_) throw Error("cannot open data file '" + data_path.string() + "'");
}

Speclib EnviCubeReader::readLines(std::size_t first_line, std::size_t n_lines) {
    const EnviHeader& h = header_;
    if (n_lines == 0 || first_line + n_lines > h.lines) throw Error("line range outside the cube");
    const std::size_t bpv = bytesPerValue(h.data_type);
    const bool swap = (h.byte_order == 1) != hostIsBigEndian();
    const std::size_t pixels = n_lines * h.samples;

    Matrix values(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(h.bands));
    std::vector<unsigned char> buf;

    auto readAt = [&](std::size_t value_offset, std::size_t count) {
        buf.resize(count * bpv);
        in_.seekg(static_cast<std::streamoff>(h.header_offset + value_offset * bpv));
        in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in_) throw Error("I/O failure reading '" + data_path_.string() + "'");
    };

    if (h.interleave == Interleave::BSQ) {
        for (std::size_t b = 0; b < h.bands; ++b) {
            readAt(valueIndex(h, first_line, 0, b), pixels);
            for (std::size_t p = 0; p < pixels; ++p)
                values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(b)) =
                    decode(buf.data() + p * bpv, h.data_type, swap);
        }
    } else {
        readAt(valueIndex(h, first_line, 0, 0), pixels * h.bands);
        for (std::size_t l = 0; l < n_lines; ++l)
            for (std::size_t x = 0; x < h.samples; ++x)
                for (std::size_t b = 0; b < h.bands; ++b) {
                    const std::size_t local = valueIndex(h, l, x, b) - valueIndex(h, 0, 0, 0);
                    values(static_cast<Eigen::Index>(l * h.samples + x), static_cast<Eigen::Index>(b)) =
                        decode(buf.data() + local * bpv, h.data_type, swap);
                }
    }

    std::vector<double> xs(pixels), ys(pixels);
    std::vector<std::int64_t> ids(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
        xs[p] = static_cast<double>(p % h.samples);
        ys[p] = static_cast<double>(first_line + p / h.samples);
        ids[p] = static_cast<std::int64_t>(first_line * h.samples + p + 1);
    }
    SiTable si;
    si.set(SiColumn::numeric("x", std::move(xs)));
    si.set(SiColumn::numeric("y", std::move(ys)));
    return Speclib(std::move(values), grid_, std::move(si), {}, std::move(ids));
}

Speclib readEnviCube(const std::filesystem::path& data_path, const std::filesystem::path& header_path) {
    EnviCubeReader reader(data_path, header_path);
    return reader.readLines(0, reader.header().lines);
}

// --- writer -----------------------------------------------------------------

EnviCubeWriter::EnviCubeWriter(const std::filesystem::path& data_path, EnviHeader header)
    : data_path_(data_path), header_(std::move(header)) {
    if (header_.samples < 1 || header_.lines < 1 || header_.bands < 1)
        throw Error("output cube dimensions must be >= 1");
    header_.header_offset = 0;
    std::error_code ec;
    std::filesystem::remove(enviHeaderPathFor(data_path_), ec);
    {
        std::ofstream create(data_path_, std::ios::binary | std::ios::trunc);
        if (!create) throw Error("cannot create '" + data_path_.string() + "'");
    }
    std::filesystem::resize_file(data_path_, header_.dataBytes(), ec);
    if (ec) throw Error("cannot size '" + data_path_.string() + "': " + ec.message());
    out_.open(data_path_, std::ios::binary | std::ios::in | std::ios::out);
    if (!out_) throw Error("cannot open '" + data_path_.string() + "' for writing");
    lines_written_.assign(header_.lines, false);
}

EnviCubeWriter::~EnviCubeWriter() {
    if (!finished_) valid_ = false;
}

void EnviCubeWriter::writeLines(std::size_t first_line, const Matrix& values) {
    const EnviHeader& h = header_;
    if (finished_) throw Error("writer already finished");
    if (static_cast<std::size_t>(values.cols()) != h.bands) {
        valid_ = false;
        throw Error("block has " + std::to_string(values.cols()) + " bands, output declared with " +
                    std::to_string(h.bands));
    }
    if (values.rows() == 0 || static_cast<std::size_t>(values.rows()) % h.samples != 0) {
        valid_ = false;
        throw Error("block row count is not a whole number of image lines");
    }
    const std::size_t n_lines = static_cast<std::size_t>(values.rows()) / h.samples;
    if (first_line + n_lines > h.lines) {
        valid_ = false;
        throw Error("block extends past the last image line");
    }
    const std::size_t bpv = bytesPerValue(h.data_type);
    const bool swap = (h.byte_order == 1) != hostIsBigEndian();
    const std::size_t pixels = n_lines * h.samples;
    std::vector<unsigned char> buf;

    auto writeAt = [&](std::size_t value_offset) {
        out_.seekp(static_cast<std::streamoff>(value_offset * bpv));
        out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out_) {
            valid_ = false;
            throw Error("I/O failure writing '" + data_path_.string() + "'");
        }
    };

    if (h.interleave == Interleave::BSQ) {
        buf.resize(pixels * bpv);
        for (std::size_t b = 0; b < h.bands; ++b) {
            for (std::size_t p = 0; p < pixels; ++p)
                encode(buf.data() + p * bpv, values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(b)),
                       h.data_type, swap);
            writeAt(valueIndex(h, first_line, 0, b));
        }
    } else {
        buf.resize(pixels * h.bands * bpv);
        for (std::size_t l = 0; l < n_lines; ++l)
            for (std::size_t x = 0; x < h.samples; ++x)
                for (std::size_t b = 0; b < h.bands; ++b) {
                    const std::size_t local = valueIndex(h, l, x, b) - valueIndex(h, 0, 0, 0);
                    encode(buf.data() + local * bpv,
                           values(static_cast<Eigen::Index>(l * h.samples + x), static_cast<Eigen::Index>(b)),
                           h.data_type, swap);
                }
        writeAt(valueIndex(h, first_line, 0, 0));
    }
    for (std::size_t l = 0; l < n_lines; ++l) lines_written_[first_line + l] = true;
}

void EnviCubeWriter::finish() {
    if (finished_) return;
    if (!valid_) throw Error("output '" + data_path_.string() + "' is invalid after an earlier failure");
    if (std::find(lines_written_.begin(), lines_written_.end(), false) != lines_written_.end()) {
        valid_ = false;
        throw Error("output '" + data_path_.string() + "' is incomplete");
    }
    out_.flush();
    out_.close();
    if (!out_) {
        valid_ = false;
        throw Error("I/O failure closing '" + data_path_.string() + "'");
    }
    std::ofstream hdr(enviHeaderPathFor(data_path_));
    hdr << formatEnviHeader(header_);
    hdr.flush();
    if (!hdr) {
        valid_ = false;
        throw Error("I/O failure writing header for '" + data_path_.string() + "'");
    }
    finished_ = true;
}

void writeEnviCube(const Speclib& s, CubeDims dims, const std::filesystem::path& data_path, EnviDataType data_type,
                   Interleave interleave, int byte_order) {
    if (s.samples() != dims.samples * dims.lines)
        throw Error("row-count mismatch: " + std::to_string(s.samples()) + " spectra for a " +
                    std::to_string(dims.samples) + "x" + std::to_string(dims.lines) + " cube");
    EnviHeader h;
    h.samples = dims.samples;
    h.lines = dims.lines;
    h.bands = s.bands();
    h.interleave = interleave;
    h.data_type = data_type;
    h.byte_order = byte_order;
    h.wavelength = s.wavelengths();
    h.fwhm = s.fwhm();
    h.wavelength_units = "Nanometers";
    EnviCubeWriter writer(data_path, std::move(h));
    writer.writeLines(0, s.spectra());
    writer.finish();
}

}  // namespace specwb
