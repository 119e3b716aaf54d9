#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gplab/fock.hpp"
#include "gplab/grid.hpp"

namespace gplab::io {

using Json = nlohmann::ordered_json;

/// Shortest text with 17 significant digits ("%.17g"); NaN and infinities become null in JSON.
std::string format_double(double x);

/// Serialises with every floating-point number printed by format_double, two-space indent.
std::string dump_json(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

/// CSV with a fixed header; every value printed by format_double.
class CsvWriter {
public:
    CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(const std::vector<double>& values);
    std::string str() const;
    void save(const std::filesystem::path& path) const { write_text(path, str()); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

/// Little-endian complex64 dump plus a JSON sidecar `<stem>.json` describing the layout.
void dump_field(const std::filesystem::path& bin_path, const WaveField& field);
void dump_fock_vector(const std::filesystem::path& bin_path, const fock::FockVector& v);

/// Reads a complex64 dump back (for round-trip tests).
std::vector<std::complex<float>> read_complex64(const std::filesystem::path& bin_path);

}  // namespace gplab::io
