#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "specwb/speclib.hpp"

namespace support {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    double normal(double mean = 0, double sd = 1) { return std::normal_distribution<double>(mean, sd)(gen_); }

    specwb::Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
        specwb::Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(lo, hi);
        return m;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

inline std::vector<double> grid(double start, double step, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = start + step * k;
    return g;
}

inline specwb::Speclib lib(specwb::Matrix values, std::vector<double> centers, specwb::SiTable si = {}) {
    return specwb::createSpeclib(std::move(values), std::move(centers), std::nullopt, std::move(si),
                                 specwb::WavelengthUnit::Nanometer);
}

inline specwb::Speclib row(const std::vector<double>& values, std::vector<double> centers) {
    specwb::Matrix m(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) m(0, static_cast<Eigen::Index>(k)) = values[k];
    return lib(std::move(m), std::move(centers));
}

inline std::vector<double> rowOf(const specwb::Speclib& s, std::size_t i = 0) {
    std::vector<double> out(s.bands());
    for (std::size_t k = 0; k < s.bands(); ++k)
        out[k] = s.spectra()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    return out;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("specwb-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace support
