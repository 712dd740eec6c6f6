#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace specknet {

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path noisy_path;                ///< resolved against the manifest root
  std::optional<std::filesystem::path> clean_path;  ///< registered/averaged reference, if any
};

/// Line-oriented manifest:
///
///   # comment
///   root: <directory>                      (optional, default: the manifest's directory)
///   entry id=<id> noisy=<path> [clean=<path>]
///
/// Relative paths resolve against root; relative roots resolve against the manifest's directory.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  /// Entries sorted by image_id.
  std::vector<ManifestEntry> sorted_entries() const;
};

/// Parses manifest text. `source` names the input in error messages; `base_dir` anchors a relative root.
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& source = "manifest");

/// Parses and validates: every noisy file must exist (all missing paths are reported together).
DatasetManifest load_manifest(const std::filesystem::path& path);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace specknet
