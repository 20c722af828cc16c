#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"

namespace saliency {

// 17 significant digits round-trips any IEEE double exactly, which keeps
// golden files stable across runs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& field, const std::string& context) {
    const char* begin = field.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || (end && *end != '\0'))
        throw InputError(context + ": cannot parse number '" + field + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

// Headerless numeric CSV -> matrix.
inline Matrix read_matrix_csv(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw InputError("empty matrix file: " + path.string());
    std::vector<std::vector<double>> rows;
    rows.reserve(lines.size());
    for (std::size_t r = 0; r < lines.size(); ++r) {
        auto fields = split_csv_line(lines[r]);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields)
            row.push_back(parse_double(f, path.string() + " row " + std::to_string(r)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(path.string() + ": ragged row " + std::to_string(r));
        rows.push_back(std::move(row));
    }
    return Matrix::from_rows(rows);
}

inline std::string matrix_to_csv(const Matrix& m) {
    std::ostringstream out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << content;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace saliency
