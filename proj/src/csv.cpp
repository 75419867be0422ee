#include "hssd/csv.hpp"

#include "hssd/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace hssd::csv {

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!line.empty() && line.back() == '\r' && !cur.empty() && cur.back() == '\r') cur.pop_back();
    fields.push_back(cur);
    return fields;
}

Table read_file(const std::string& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    Table t;
    std::string line;
    std::size_t line_number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line, delimiter);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
        } else {
            t.rows.push_back(std::move(fields));
            t.line_numbers.push_back(line_number);
        }
    }
    if (!have_header) throw ParseError("file has no header row: " + path);
    return t;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Writer::Writer(const std::string& path, char delimiter)
    : out_(path), delimiter_(delimiter) {
    if (!out_) throw Error("cannot open file for writing: " + path);
}

void Writer::field(const std::string& v) {
    if (row_started_) out_ << delimiter_;
    bool needs_quote = v.find(delimiter_) != std::string::npos || v.find('"') != std::string::npos;
    if (needs_quote) {
        out_ << '"';
        for (char c : v) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << v;
    }
    row_started_ = true;
}

void Writer::field(double v) { field(format_full(v)); }

void Writer::field(long v) {
    if (row_started_) out_ << delimiter_;
    out_ << v;
    row_started_ = true;
}

void Writer::end_row() {
    out_ << '\n';
    row_started_ = false;
}

double parse_double(const std::string& cell, std::size_t line_number, const std::string& column) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
        throw ParseError("line " + std::to_string(line_number) + ": column '" + column +
                         "' is not a number: '" + cell + "'");
    }
    return v;
}

long parse_long(const std::string& cell, std::size_t line_number, const std::string& column) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(cell.c_str(), &end, 10);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
        throw ParseError("line " + std::to_string(line_number) + ": column '" + column +
                         "' is not an integer: '" + cell + "'");
    }
    return v;
}

} // namespace hssd::csv
