#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jane/genmodel.hpp"
#include "jane/graph.hpp"

namespace jane {

// Canonical dataset directory:
//   edges.txt      `u v` per line, `# nodes <n>` header
//   X.csv          n rows of d comma-separated reals
//   y.csv          `node,label` per line (optional `node,label` header); `?` marks an unknown label
//   splits.json    {"train": [...], "val": [...], "test": [...]}
//   meta.json      {"num_classes", "synth": SynthConfig or null}
//   manifest.json  {"n", "d", "M", "classes", "id_remap", "sha256": {file: hex}}
// Node ids in every file are 0..n-1 of the saved dataset; id_remap maps them
// to the ids of the original source.

struct DatasetManifest {
  std::int64_t n = 0;
  std::int64_t d = 0;
  int M = 0;
  std::vector<std::string> classes;
  std::vector<std::int64_t> id_remap;
  std::map<std::string, std::string> sha256;  ///< file name -> lowercase hex digest
};

/// Lowercase hex SHA-256 of a file. Throws IOError.
std::string sha256_file(const std::filesystem::path& path);

/// Writes the canonical files and the manifest into `dir` (created if
/// needed) and returns the manifest. Throws IOError.
DatasetManifest save_dataset(const Dataset& ds, const Graph& g, const std::filesystem::path& dir);

/// Reads a dataset directory. When manifest.json is present its checksums
/// and declared sizes are enforced (ChecksumMismatch, DimensionMismatch).
/// Without a manifest the node count comes from X.csv, labels are mapped to
/// class indices in first-seen order, and splits.json may be absent (then
/// every node is in test). A disconnected graph is reduced to its largest
/// component; `dropped` lists removed ids and original_ids records the remap.
///
/// Throws ParseError (file, line, column), DimensionMismatch,
/// UnknownLabelValue, IndexOutOfRange, SelfLoop, IOError.
AttributedGraph load_dataset(const std::filesystem::path& dir);

}  // namespace jane
