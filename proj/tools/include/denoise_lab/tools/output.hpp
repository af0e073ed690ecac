#pragma once

#include "denoise_lab/tools/config.hpp"
#include "denoise_lab/tools/plot.hpp"

#include <string>
#include <vector>

namespace denoise_lab::tools {

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  // Comma-separated, header first, '\n' line endings.
  std::string csv() const;
};

struct RunOutput {
  std::string experiment;
  // tables.front() is <experiment>.csv
  std::vector<Table> tables;
  std::vector<Plot> plots;
  // Extra text files (name with extension, contents).
  std::vector<std::pair<std::string, std::string>> files;
  // Human-readable lines for stdout.
  std::vector<std::string> summary;
  int assumption_violations = 0;
  bool checks_failed = false;
};

std::string manifest(const ExperimentConfig& cfg);

// Creates the directory if needed and writes every table, plot, file and manifest.txt.
void write_outputs(const RunOutput& run, const ExperimentConfig& cfg);

std::string version_string();

}  // namespace denoise_lab::tools
