#include "delirisk/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "delirisk/errors.hpp"

namespace delirisk {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    // Strip a trailing carriage return from files written on Windows.
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

CsvTable CsvTable::load(const std::string& path,
                        const std::vector<std::string>& expected_columns) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);

    CsvTable t;
    t.path_ = path;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (!have_header) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                bool known = false;
                for (const auto& c : expected_columns) known |= (c == fields[i]);
                if (!known)
                    throw InputError(path + ": unknown column '" + fields[i] + "'");
                if (!t.column_index_.emplace(fields[i], i).second)
                    throw InputError(path + ": duplicate column '" + fields[i] + "'");
            }
            for (const auto& c : expected_columns) {
                if (!t.column_index_.count(c))
                    throw InputError(path + ": missing column '" + c + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != t.column_index_.size())
            throw InputError(path + ": row with " + std::to_string(fields.size()) +
                             " fields, expected " +
                             std::to_string(t.column_index_.size()));
        t.cells_.push_back(std::move(fields));
    }
    if (!have_header) throw InputError(path + ": empty file, header expected");
    return t;
}

const std::string& CsvTable::at(std::size_t row, const std::string& column) const {
    auto it = column_index_.find(column);
    if (it == column_index_.end())
        throw InputError(path_ + ": no column '" + column + "'");
    return cells_[row][it->second];
}

long long parse_int(const std::string& value, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        throw InputError("invalid integer for " + what + ": '" + value + "'");
    return v;
}

double parse_double(const std::string& value, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        throw InputError("invalid number for " + what + ": '" + value + "'");
    return v;
}

std::string format_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

}  // namespace delirisk
