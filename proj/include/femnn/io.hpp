#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "femnn/errors.hpp"

namespace femnn::io {

// %.17g keeps doubles round-trippable and output byte-stable across runs.
std::string fmt(double v);

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);

  private:
    std::ofstream out_;
    std::size_t columns_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace femnn::io
