#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace aw4re {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal standalone SVG charts. Non-finite points are skipped.
void write_line_svg(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series);
void write_bar_svg(const std::filesystem::path& path, const std::string& title,
                   const std::vector<std::string>& labels, const std::vector<double>& values);

}  // namespace aw4re
