#ifndef HSSD_CSV_HPP
#define HSSD_CSV_HPP

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

namespace hssd::csv {

// Parsed delimiter-separated file: header row plus string cells.
// line_numbers keeps the 1-based source line of each data row so that
// validation errors can cite the offending line.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    // Index of a named column, -1 when absent.
    int column(const std::string& name) const;
};

Table read_file(const std::string& path, char delimiter = ',');

// Parse one line into fields. Supports double-quoted fields with ""
// escaping; trailing CR is stripped.
std::vector<std::string> split_line(const std::string& line, char delimiter);

// Full-precision decimal rendering (%.17g): round-trips any double.
std::string format_full(double v);

// Row-oriented writer; numeric cells go through format_full so emitted
// files are reproducible and lossless.
class Writer {
public:
    explicit Writer(const std::string& path, char delimiter = ',');
    void field(const std::string& v);
    void field(double v);
    void field(long v);
    void field(int v) { field(static_cast<long>(v)); }
    void end_row();
    bool good() const { return out_.good(); }

private:
    std::ofstream out_;
    char delimiter_;
    bool row_started_ = false;
};

double parse_double(const std::string& cell, std::size_t line_number, const std::string& column);
long parse_long(const std::string& cell, std::size_t line_number, const std::string& column);

} // namespace hssd::csv

#endif // HSSD_CSV_HPP
