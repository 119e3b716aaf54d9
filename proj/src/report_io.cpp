#include "gplab/report_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab::io {

namespace {

void dump_value(const Json& j, std::ostringstream& out, int indent) {
    const std::string pad(indent, ' ');
    const std::string inner(indent + 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out << ",\n";
                first = false;
                out << inner << Json(it.key()).dump() << ": ";
                dump_value(it.value(), out, indent + 2);
            }
            out << "\n" << pad << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out << "[]";
                return;
            }
            bool scalars = true;
            for (const auto& e : j) scalars &= !e.is_structured();
            if (scalars) {
                out << "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out << ", ";
                    dump_value(j[i], out, indent + 2);
                }
                out << "]";
                return;
            }
            out << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out << ",\n";
                out << inner;
                dump_value(j[i], out, indent + 2);
            }
            out << "\n" << pad << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double x = j.get<double>();
            out << (std::isfinite(x) ? format_double(x) : "null");
            return;
        }
        default:
            out << j.dump();
    }
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // Keep floats recognisable as floats.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string dump_json(const Json& j) {
    std::ostringstream out;
    dump_value(j, out, 0);
    out << "\n";
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
    if (!out) throw ValidationError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, dump_json(j)); }

void CsvWriter::row(const std::vector<double>& values) {
    require(values.size() == header_.size(), "CSV row width does not match the header");
    rows_.push_back(values);
}

std::string CsvWriter::str() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << "\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
        out << "\n";
    }
    return out.str();
}

namespace {

void write_complex64(const std::filesystem::path& path, const cd* data, std::size_t n) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    std::vector<unsigned char> buf(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
        float parts[2] = {static_cast<float>(data[i].real()), static_cast<float>(data[i].imag())};
        for (int p = 0; p < 2; ++p) {
            auto bits = std::bit_cast<std::uint32_t>(parts[p]);
            for (int b = 0; b < 4; ++b) buf[i * 8 + p * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
        }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::filesystem::path sidecar(const std::filesystem::path& bin) {
    auto p = bin;
    p.replace_extension(".json");
    return p;
}

}  // namespace

void dump_field(const std::filesystem::path& bin_path, const WaveField& field) {
    write_complex64(bin_path, field.values.data(), field.values.size());
    Json meta;
    meta["kind"] = "wave_field";
    meta["dtype"] = "complex64";
    meta["byte_order"] = "little";
    meta["file"] = bin_path.filename().string();
    meta["dim"] = field.grid.dim;
    meta["points_per_dim"] = field.grid.points;
    meta["box_length"] = field.grid.box_length;
    meta["count"] = field.values.size();
    meta["layout"] = "row-major, last axis fastest";
    meta["coordinates"] = "x_j = -box_length / 2 + j * box_length / points_per_dim";
    write_json(sidecar(bin_path), meta);
}

void dump_fock_vector(const std::filesystem::path& bin_path, const fock::FockVector& v) {
    write_complex64(bin_path, v.amplitudes.data(), static_cast<std::size_t>(v.amplitudes.size()));
    const auto& b = *v.basis;
    Json meta;
    meta["kind"] = "fock_vector";
    meta["dtype"] = "complex64";
    meta["byte_order"] = "little";
    meta["file"] = bin_path.filename().string();
    meta["modes"] = b.modes();
    meta["n_max"] = b.n_max();
    meta["count"] = b.size();
    meta["ordering"] = "graded by total particle number, lexicographically descending within a shell";
    Json occ = Json::array();
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto o = b.occupation(i);
        occ.push_back(std::vector<int>(o.begin(), o.end()));
    }
    meta["occupations"] = std::move(occ);
    write_json(sidecar(bin_path), meta);
}

std::vector<std::complex<float>> read_complex64(const std::filesystem::path& bin_path) {
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + bin_path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(buf.size() % 8 == 0, "complex64 file size is not a multiple of 8");
    std::vector<std::complex<float>> out(buf.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        float parts[2];
        for (int p = 0; p < 2; ++p) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[i * 8 + p * 4 + b]) << (8 * b);
            parts[p] = std::bit_cast<float>(bits);
        }
        out[i] = {parts[0], parts[1]};
    }
    return out;
}

}  // namespace gplab::io
