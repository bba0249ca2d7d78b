#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "specwb/speclib.hpp"

namespace specwb {

// ---------------------------------------------------------------------------
// CSV spectral libraries
//
// Layout: a header row with an optional leading "id" column, then "si:<name>"
// columns, then one column per band whose header is the wavelength in nm.
// Lines starting with '#' carry metadata: "#fwhm", "#unit" (value unit),
// "#wavelength_unit" and "#mask".
// ---------------------------------------------------------------------------

Speclib readCsvSpeclib(const std::filesystem::path& path);
Speclib readCsvSpeclib(std::istream& in, const std::string& source_name = "<stream>");

void writeCsvSpeclib(const Speclib& s, const std::filesystem::path& path);
void writeCsvSpeclib(const Speclib& s, std::ostream& out);

/// 17 significant digits, so every double parses back unchanged. NaN is "NA".
std::string formatNumber(double v);

/// Splits one CSV record. Double-quoted fields may contain commas.
std::vector<std::string> splitCsvLine(const std::string& line);
std::string quoteCsvField(const std::string& field);

// ---------------------------------------------------------------------------
// ENVI raster cubes
// ---------------------------------------------------------------------------

enum class Interleave { BSQ, BIL, BIP };

enum class EnviDataType : int { Int16 = 2, Float32 = 4, Float64 = 5, UInt16 = 12 };

std::size_t bytesPerValue(EnviDataType type);
Interleave parseInterleave(const std::string& text);
std::string interleaveName(Interleave interleave);

struct EnviHeader {
    std::size_t samples = 0;
    std::size_t lines = 0;
    std::size_t bands = 0;
    std::size_t header_offset = 0;
    Interleave interleave = Interleave::BSQ;
    EnviDataType data_type = EnviDataType::Float32;
    int byte_order = 0;  // 0 little endian, 1 big endian
    std::vector<double> wavelength;
    std::vector<double> fwhm;
    std::string wavelength_units;
    // Keys this reader does not interpret, kept in file order with their
    // original spelling so a rewrite reproduces them.
    std::vector<std::pair<std::string, std::string>> extra;

    std::size_t dataBytes() const { return samples * lines * bands * bytesPerValue(data_type); }
};

EnviHeader parseEnviHeader(std::istream& in);
EnviHeader readEnviHeader(const std::filesystem::path& path);
std::string formatEnviHeader(const EnviHeader& header);

/// "cube.dat" -> "cube.hdr"; "cube" -> "cube.hdr".
std::filesystem::path enviHeaderPathFor(const std::filesystem::path& data_path);

/// Pixels in row-major order (line by line); SI gains numeric columns "x" and
/// "y" holding the pixel coordinates.
Speclib readEnviCube(const std::filesystem::path& data_path, const std::filesystem::path& header_path);

struct CubeDims {
    std::size_t samples = 0;
    std::size_t lines = 0;
};

/// Writes the data file and its header (see enviHeaderPathFor).
void writeEnviCube(const Speclib& s, CubeDims dims, const std::filesystem::path& data_path,
                   EnviDataType data_type = EnviDataType::Float64, Interleave interleave = Interleave::BSQ,
                   int byte_order = 0);

// ---------------------------------------------------------------------------
// Chunked processing
// ---------------------------------------------------------------------------

struct ChunkPlan {
    std::vector<std::size_t> row_offsets;
    std::vector<std::size_t> rows_per_chunk;

    std::size_t n() const { return row_offsets.size(); }
};

/// Splits [0, lines) into blocks of ceil(target_bytes / row_bytes) rows (at
/// least one); the last block is truncated.
ChunkPlan planChunks(std::size_t lines, std::size_t target_bytes, std::size_t row_bytes);

/// Random-access reader over whole image rows of an ENVI cube.
class EnviCubeReader {
public:
    EnviCubeReader(const std::filesystem::path& data_path, const std::filesystem::path& header_path);

    const EnviHeader& header() const { return header_; }
    WavelengthGrid grid() const { return grid_; }

    /// Rows [first_line, first_line + n_lines) as a Speclib with "x"/"y" SI
    /// columns and IDs equal to the 1-based pixel index.
    Speclib readLines(std::size_t first_line, std::size_t n_lines);

private:
    std::filesystem::path data_path_;
    EnviHeader header_;
    WavelengthGrid grid_;
    std::ifstream in_;
};

/// Sink for an ENVI cube written block-wise. The header is written only by
/// finish(); an abandoned writer leaves no header so the partial output is
/// never mistaken for a complete cube.
class EnviCubeWriter {
public:
    EnviCubeWriter(const std::filesystem::path& data_path, EnviHeader header);
    ~EnviCubeWriter();

    EnviCubeWriter(const EnviCubeWriter&) = delete;
    EnviCubeWriter& operator=(const EnviCubeWriter&) = delete;

    const EnviHeader& header() const { return header_; }

    /// values: (n_lines * samples) x bands, row-major pixel order.
    void writeLines(std::size_t first_line, const Matrix& values);
    void finish();
    /// Marks the output invalid; finish() will refuse to write the header.
    void abandon() { valid_ = false; }

    bool valid() const { return valid_; }
    bool finished() const { return finished_; }

private:
    std::filesystem::path data_path_;
    EnviHeader header_;
    std::fstream out_;
    std::vector<bool> lines_written_;
    bool valid_ = true;
    bool finished_ = false;
};

/// A kernel maps one block of spectra to either a Speclib or a bare matrix
/// with one row per input spectrum. Kernels must be row-local.
using KernelOutput = std::variant<Speclib, Matrix>;
using Kernel = std::function<KernelOutput(const Speclib&)>;

struct ChunkRunStats {
    std::size_t chunks = 0;
    std::size_t peak_chunks_in_memory = 0;
};

/// Reads each planned block, applies the kernel and writes the result in
/// plan order. At most two blocks are alive at any time (one being written
/// while the next is processed). Kernel output must have the band count the
/// writer was declared with.
ChunkRunStats processChunked(EnviCubeReader& reader, EnviCubeWriter& writer, const Kernel& kernel,
                             const ChunkPlan& plan, unsigned threads = 1);

}  // namespace specwb
