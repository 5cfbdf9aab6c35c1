// Minimal CSV writer: header row, comma separators, 17 significant digits.
#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hmx {

using CsvValue = std::variant<long long, double, std::string>;

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<CsvValue>> rows;

    explicit CsvTable(std::vector<std::string> cols) : columns(std::move(cols)) {}

    void add_row(std::initializer_list<CsvValue> values) {
        if (values.size() != columns.size())
            throw std::invalid_argument("csv row arity does not match header");
        rows.emplace_back(values);
    }

    std::string to_string() const {
        std::ostringstream out;
        for (size_t c = 0; c < columns.size(); ++c)
            out << columns[c] << (c + 1 < columns.size() ? "," : "");
        out << "\n";
        char buf[64];
        for (const auto& row : rows) {
            for (size_t c = 0; c < row.size(); ++c) {
                if (const auto* i = std::get_if<long long>(&row[c])) {
                    out << *i;
                } else if (const auto* d = std::get_if<double>(&row[c])) {
                    std::snprintf(buf, sizeof buf, "%.17g", *d);
                    out << buf;
                } else {
                    out << std::get<std::string>(row[c]);
                }
                out << (c + 1 < row.size() ? "," : "");
            }
            out << "\n";
        }
        return out.str();
    }

    // All-or-nothing: the file appears only after every row is computed.
    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        out << to_string();
        if (!out) throw std::runtime_error("write failed for " + path);
    }
};

}  // namespace hmx
