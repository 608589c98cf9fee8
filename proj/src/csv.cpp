#include "qmeas/csv.hpp"

#include <charconv>
#include <filesystem>
#include <stdexcept>
#include <system_error>

namespace qmeas {

std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
    return {buf, res.ptr};
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::sep() {
    if (row_open_) out_ << ',';
    row_open_ = true;
}

CsvWriter& CsvWriter::cell(double value) {
    sep();
    out_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t value) {
    sep();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(long value) {
    sep();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& value) {
    sep();
    out_ << value;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_open_ = false;
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory: " + path);
}

} // namespace qmeas
