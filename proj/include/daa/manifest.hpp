#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace daa {

enum class Label : std::uint8_t { benign = 0, backdoor = 1 };
/// Detector output; shares the label encoding so predictions and ground truth compare directly.
using Verdict = Label;

enum class Split : std::uint8_t { train = 0, test = 1 };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;
Label parse_label(std::string_view text);
Split parse_split(std::string_view text);

struct ManifestEntry {
  std::filesystem::path path;  // absolute once loaded
  Label label = Label::benign;
  std::string scenario;
  Split split = Split::train;
};

/// Labeled collection of trajectory files. Stored as JSON Lines, one record
/// per line: {"path": ..., "label": "benign"|"backdoor", "scenario": ..., "split": "train"|"test"}.
/// Relative paths are resolved against the manifest's directory.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> select(Split split) const;
};

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                               bool check_paths = true);
DatasetManifest read_manifest(const std::filesystem::path& path, bool check_paths = true);

/// Paths under the manifest's directory are written relative to it.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace daa
