#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

// Locale-free CSV and manifest emission. Doubles are printed with
// std::to_chars (shortest round-trip form) so repeated runs with the same
// seed produce byte-identical files.

namespace qmeas {

std::string format_double(double value);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& cell(double value);
    CsvWriter& cell(std::uint64_t value);
    CsvWriter& cell(long value);
    CsvWriter& cell(const std::string& value);
    void end_row();

private:
    std::ofstream out_;
    bool row_open_ = false;
    void sep();
};

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

void ensure_directory(const std::string& path);

} // namespace qmeas
