#include "daa/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "daa/errors.hpp"

namespace daa {

std::string_view to_string(Label label) noexcept {
  return label == Label::backdoor ? "backdoor" : "benign";
}

std::string_view to_string(Split split) noexcept { return split == Split::test ? "test" : "train"; }

Label parse_label(std::string_view text) {
  if (text == "benign") return Label::benign;
  if (text == "backdoor") return Label::backdoor;
  throw Error(ErrorCode::invalid_manifest, "label must be benign or backdoor, got '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw Error(ErrorCode::invalid_manifest, "split must be train or test, got '" + std::string(text) + "'");
}

std::vector<ManifestEntry> DatasetManifest::select(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                               bool check_paths) {
  DatasetManifest manifest;
  std::istringstream lines{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "manifest line " + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::invalid_manifest, where + ": " + e.what());
    }
    if (!record.is_object()) throw Error(ErrorCode::invalid_manifest, where + ": not an object");
    for (const char* key : {"path", "label", "scenario", "split"}) {
      if (!record.contains(key) || !record[key].is_string()) {
        throw Error(ErrorCode::invalid_manifest, where + ": missing string field '" + key + "'");
      }
    }
    ManifestEntry entry;
    std::filesystem::path p = record["path"].get<std::string>();
    entry.path = p.is_absolute() ? p : (base_dir / p).lexically_normal();
    entry.label = parse_label(record["label"].get<std::string>());
    entry.scenario = record["scenario"].get<std::string>();
    entry.split = parse_split(record["split"].get<std::string>());
    if (check_paths) {
      std::ifstream probe(entry.path, std::ios::binary);
      if (!probe) throw Error(ErrorCode::invalid_manifest, where + ": cannot read " + entry.path.string());
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path, bool check_paths) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path(), check_paths);
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot create manifest " + path.string());
  const auto base = std::filesystem::absolute(path).parent_path();
  for (const auto& e : manifest.entries) {
    auto stored = e.path;
    if (stored.is_absolute()) {
      auto rel = stored.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") stored = rel;
    }
    nlohmann::ordered_json record;
    record["path"] = stored.generic_string();
    record["label"] = to_string(e.label);
    record["scenario"] = e.scenario;
    record["split"] = to_string(e.split);
    out << record.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace daa
