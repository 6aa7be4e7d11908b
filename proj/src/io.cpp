#include "femnn/io.hpp"

#include <cstdio>
#include <sstream>

namespace femnn::io {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_)
        throw ConfigError("CsvWriter: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_)
        throw ShapeError("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << (i ? "," : "") << fmt(values[i]);
    out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open for writing: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace femnn::io
