#include "rgcov/io.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rgcov {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // Trim surrounding whitespace and CR.
        std::size_t a = field.find_first_not_of(" \t\r");
        std::size_t b = field.find_last_not_of(" \t\r");
        fields.push_back(a == std::string::npos ? std::string() : field.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_number(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end == s.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

}  // namespace

SeriesTable series_from_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(ss, line)) {
        if (line.empty() || line == "\r") continue;
        rows.push_back(split_line(line));
    }
    require(rows.size() >= 2, ErrorKind::Data, "CSV needs a header and at least one data row");
    const std::vector<std::string>& header = rows[0];
    const std::size_t n_cols = header.size();
    require(n_cols >= 1, ErrorKind::Data, "CSV header is empty");
    for (std::size_t r = 1; r < rows.size(); ++r)
        require(rows[r].size() == n_cols, ErrorKind::Data,
                "CSV row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                    " fields, expected " + std::to_string(n_cols));

    // A leading label column is detected from the header name or, failing
    // that, from a non-numeric first data cell (timestamps may be numeric).
    std::string head0 = header[0];
    for (char& ch : head0) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const bool label_header =
        head0 == "date" || head0 == "time" || head0 == "timestamp" || head0 == "period" || head0 == "index";
    double probe = 0.0;
    const bool has_dates = label_header || !parse_number(rows[1][0], &probe);
    const std::size_t first_series = has_dates ? 1 : 0;
    require(n_cols > first_series, ErrorKind::Data, "CSV has no numeric series columns");

    SeriesTable table;
    for (std::size_t c = first_series; c < n_cols; ++c) table.names.push_back(header[c]);
    const auto t_len = static_cast<Eigen::Index>(rows.size() - 1);
    const auto n = static_cast<Eigen::Index>(n_cols - first_series);
    table.values = Matrix(n, t_len);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (has_dates) table.dates.push_back(rows[r][0]);
        for (std::size_t c = first_series; c < n_cols; ++c) {
            double v = 0.0;
            require(parse_number(rows[r][c], &v), ErrorKind::Data,
                    "CSV field at row " + std::to_string(r + 1) + ", column '" + header[c] +
                        "' is not numeric");
            table.values(static_cast<Eigen::Index>(c - first_series),
                         static_cast<Eigen::Index>(r - 1)) = v;
        }
    }
    return table;
}

std::string series_to_csv(const SeriesTable& table) {
    const auto n = table.values.rows();
    const auto t_len = table.values.cols();
    require(static_cast<Eigen::Index>(table.names.size()) == n, ErrorKind::Config,
            "series name count does not match the panel");
    const bool has_dates = !table.dates.empty();
    if (has_dates)
        require(static_cast<Eigen::Index>(table.dates.size()) == t_len, ErrorKind::Config,
                "date label count does not match the panel length");

    std::string out;
    if (has_dates) out += "date";
    for (Eigen::Index i = 0; i < n; ++i) {
        if (has_dates || i > 0) out += ',';
        out += table.names[static_cast<std::size_t>(i)];
    }
    out += '\n';
    char buf[64];
    for (Eigen::Index t = 0; t < t_len; ++t) {
        if (has_dates) out += table.dates[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < n; ++i) {
            if (has_dates || i > 0) out += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", table.values(i, t));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::Data, "cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    require(!in.bad(), ErrorKind::Data, "error while reading file: " + path);
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Data, "cannot open file for writing: " + path);
    out << content;
    out.flush();
    require(out.good(), ErrorKind::Data, "error while writing file: " + path);
}

std::string content_digest(const std::string& content) {
    std::uint64_t hash = 14695981039346656037ull;  // FNV offset basis
    for (unsigned char c : content) {
        hash ^= c;
        hash *= 1099511628211ull;  // FNV prime
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace rgcov
