#pragma once

// Flat `key = value` run configuration. Blank lines and lines starting with
// '#' are ignored; unknown or repeated keys are errors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexrec/metrics.hpp"
#include "vexrec/trainer.hpp"

namespace vexrec {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  TrainConfig train;
  double split_fraction = 0.7;
  std::size_t min_count = 1;
  std::size_t context_dim = 16;  // D when an image-free model has no features
  std::size_t top_n = 5;
  std::size_t max_review_length = 30;
  F1Mode f1_mode = F1Mode::OfAverages;

  std::filesystem::path interactions;
  std::filesystem::path reviews;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path checkpoint;
  std::filesystem::path output_dir;

  // Relative paths in a config file resolve against the file's directory.
  static RunConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  // Applies one `key=value` override.
  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base_dir = {});

  std::filesystem::path checkpoint_path() const;
  void write(std::ostream& out) const;
};

std::vector<std::string> run_config_keys();

}  // namespace vexrec
