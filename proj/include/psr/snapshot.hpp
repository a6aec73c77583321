#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "psr/core.hpp"
#include "psr/spectral.hpp"

namespace psr {

/// Self-describing model dump: alphabet, dictionaries, rank, factors and parameters.
struct ModelSnapshot {
  std::string env_name;
  PsrModel model;
  std::optional<Dictionaries> dictionaries;
};

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string snapshot_to_json(const ModelSnapshot& snapshot);
ModelSnapshot snapshot_from_json(const std::string& text);

void save_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path);
ModelSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace psr
