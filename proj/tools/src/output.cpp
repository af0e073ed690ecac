#include "denoise_lab/tools/output.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef DENOISE_LAB_VERSION
#define DENOISE_LAB_VERSION "unknown"
#endif

namespace denoise_lab::tools {

namespace fs = std::filesystem;

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw std::logic_error("table " + name + ": row width does not match header");
  }
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string version_string() { return DENOISE_LAB_VERSION; }

std::string manifest(const ExperimentConfig& cfg) {
  const std::string text = canonical(cfg);
  std::ostringstream out;
  out << "denoise-lab " << version_string() << '\n'
      << "experiment " << to_string(cfg.experiment) << '\n'
      << "config_hash fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a(text)
      << std::dec << '\n'
      << "seed " << cfg.seed << '\n'
      << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
      << '\n'
#if defined(__clang__)
      << "compiler clang " << __clang_version__ << '\n'
#elif defined(__GNUC__)
      << "compiler gcc " << __VERSION__ << '\n'
#endif
      << "cxx_standard " << __cplusplus << '\n'
      << "--- effective config ---\n"
      << text;
  return out.str();
}

void write_outputs(const RunOutput& run, const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("config field 'out_dir': cannot create '" + cfg.out_dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("config field 'out_dir': cannot write '" + (dir / name).string() + "'");
    out << text;
  };
  for (const auto& t : run.tables) write(t.name + ".csv", t.csv());
  for (const auto& p : run.plots) write(p.name + ".svg", render_svg(p));
  for (const auto& [name, text] : run.files) write(name, text);
  write("manifest.txt", manifest(cfg));
}

}  // namespace denoise_lab::tools
