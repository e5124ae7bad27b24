#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace delirisk {

/// Minimal comma-separated table reader for the fixed pipeline schemas.
/// Values never need quoting (their alphabets exclude commas), so this is
/// a straight split. Lines starting with '#' are provenance comments and
/// are skipped.
class CsvTable {
public:
    /// Load and validate against the expected column set. Columns may
    /// appear in any order; extras or absences are errors.
    static CsvTable load(const std::string& path,
                         const std::vector<std::string>& expected_columns);

    std::size_t rows() const { return cells_.size(); }

    /// Cell by (row, column name).
    const std::string& at(std::size_t row, const std::string& column) const;

private:
    std::map<std::string, std::size_t> column_index_;
    std::vector<std::vector<std::string>> cells_;
    std::string path_;
};

std::vector<std::string> split_csv_line(const std::string& line);

/// Parse helpers with uniform error reporting (throw InputError).
long long parse_int(const std::string& value, const std::string& what);
double parse_double(const std::string& value, const std::string& what);

/// Fixed-format float for deterministic, diff-stable artifacts.
std::string format_double(double v, int precision = 6);

}  // namespace delirisk
