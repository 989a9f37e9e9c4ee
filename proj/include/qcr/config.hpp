#pragma once
// YAML experiment files. Frequencies are given in Hz (Omega / 2 pi), times in
// seconds and voltages in volts; everything is converted to angular units.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "qcr/experiment.hpp"

namespace qcr {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Missing keys keep their defaults; unknown keys are errors.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace qcr
