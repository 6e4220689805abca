#include "jane/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <system_error>
#include <unordered_map>

#include <openssl/evp.h>

#include "jane/config_json.hpp"
#include "jane/error.hpp"

namespace jane {

namespace {

constexpr const char* kDataFiles[] = {"edges.txt", "X.csv", "y.csv", "splits.json", "meta.json"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

void append_double(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

/// Iterates over lines, tracking 1-based line numbers and stripping '\r'.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t eol = text_.find('\n', pos_);
    if (eol == std::string_view::npos) eol = text_.size();
    line = text_.substr(pos_, eol - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = eol + 1;
    ++line_no_;
    return true;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::string_view trim(std::string_view s, std::size_t& offset) {
  offset = 0;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
    ++offset;
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Eigen::MatrixXd parse_features(std::string_view text, const std::string& name) {
  std::vector<double> values;
  std::ptrdiff_t cols = -1;
  std::ptrdiff_t rows = 0;
  LineReader reader(text);
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    std::ptrdiff_t count = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
      std::size_t lead = 0;
      const std::string_view field = trim(line.substr(start, end - start), lead);
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError(name, reader.line_no(), start + lead + 1, "expected a finite real number");
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw Error(ErrorCode::DimensionMismatch, name + ":" + std::to_string(reader.line_no()) + ": row has " +
                                                    std::to_string(count) + " values, expected " +
                                                    std::to_string(cols));
    }
    ++rows;
  }
  if (cols < 0) cols = 0;
  Eigen::MatrixXd X(rows, cols);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t c = 0; c < cols; ++c) X(r, c) = values[static_cast<std::size_t>(r * cols + c)];
  }
  return X;
}

struct LabelColumn {
  std::vector<int> labels;
  std::vector<std::string> classes;
};

/// `known` fixes the class order (from the manifest); otherwise classes are
/// numbered in first-seen order.
LabelColumn parse_labels(std::string_view text, const std::string& name, NodeId n,
                         const std::vector<std::string>* known) {
  LabelColumn out;
  out.labels.assign(static_cast<std::size_t>(n), kUnknownLabel);
  std::unordered_map<std::string, int> index;
  if (known) {
    out.classes = *known;
    for (std::size_t c = 0; c < known->size(); ++c) index.emplace((*known)[c], static_cast<int>(c));
  }
  std::vector<std::size_t> seen_on(static_cast<std::size_t>(n), 0);
  LineReader reader(text);
  std::string_view line;
  bool first = true;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(name, reader.line_no(), 1, "expected 'node,label'");
    }
    std::size_t lead = 0;
    const std::string_view node_field = trim(line.substr(0, comma), lead);
    std::size_t label_lead = 0;
    const std::string_view label = trim(line.substr(comma + 1), label_lead);
    if (first && node_field == "node") {
      first = false;
      continue;
    }
    first = false;
    NodeId node = -1;
    const auto res = std::from_chars(node_field.data(), node_field.data() + node_field.size(), node);
    if (node_field.empty() || res.ec != std::errc() || res.ptr != node_field.data() + node_field.size()) {
      throw ParseError(name, reader.line_no(), lead + 1, "invalid node id");
    }
    if (node < 0 || node >= n) {
      throw ParseError(name, reader.line_no(), lead + 1,
                       "node id " + std::to_string(node) + " outside [0, " + std::to_string(n) + ")");
    }
    const std::size_t label_col = comma + 1 + label_lead + 1;
    if (label.empty()) throw ParseError(name, reader.line_no(), label_col, "empty label");
    int y = kUnknownLabel;
    if (label != "?") {
      auto it = index.find(std::string(label));
      if (it == index.end()) {
        if (known) {
          throw Error(ErrorCode::UnknownLabelValue, name + ":" + std::to_string(reader.line_no()) + ": label '" +
                                                        std::string(label) + "' is not a declared class");
        }
        it = index.emplace(std::string(label), static_cast<int>(out.classes.size())).first;
        out.classes.emplace_back(label);
      }
      y = it->second;
    }
    auto& prev_line = seen_on[static_cast<std::size_t>(node)];
    if (prev_line != 0 && out.labels[node] != y) {
      throw ParseError(name, reader.line_no(), label_col,
                       "node " + std::to_string(node) + " relabelled; first given on line " +
                           std::to_string(prev_line));
    }
    if (prev_line == 0) prev_line = reader.line_no();
    out.labels[node] = y;
  }
  return out;
}

std::vector<NodeId> json_ids(const Json& splits, const char* key, const std::string& name) {
  if (!splits.contains(key)) return {};
  try {
    return splits[key].get<std::vector<NodeId>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, name + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorCode::IOError, "sha256 failed for " + path.string());
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

DatasetManifest save_dataset(const Dataset& ds, const Graph& g, const std::filesystem::path& dir) {
  ds.validate();
  if (ds.num_nodes() != g.num_nodes()) throw Error(ErrorCode::ShapeMismatch, "dataset and graph sizes differ");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IOError, "cannot create " + dir.string() + ": " + ec.message());

  write_edge_list(g, dir / "edges.txt");

  std::string x;
  x.reserve(static_cast<std::size_t>(ds.X.size()) * 20);
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
      if (c > 0) x += ',';
      append_double(x, ds.X(r, c));
    }
    x += '\n';
  }
  write_file(dir / "X.csv", x);

  std::vector<std::string> classes = ds.class_names;
  for (int c = static_cast<int>(classes.size()); c < ds.num_classes; ++c) classes.push_back(std::to_string(c));
  std::string y = "node,label\n";
  for (NodeId i = 0; i < ds.num_nodes(); ++i) {
    const int label = ds.labels[i];
    y += std::to_string(i) + ',' + (label == kUnknownLabel ? std::string("?") : classes[label]) + '\n';
  }
  write_file(dir / "y.csv", y);

  write_json_file(dir / "splits.json", Json{{"train", ds.train}, {"val", ds.val}, {"test", ds.test}});
  write_json_file(dir / "meta.json",
                  Json{{"num_classes", ds.num_classes}, {"synth", ds.synth ? Json(*ds.synth) : Json(nullptr)}});

  DatasetManifest m;
  m.n = ds.num_nodes();
  m.d = ds.X.cols();
  m.M = ds.num_classes;
  m.classes = classes;
  if (ds.original_ids.empty()) {
    for (NodeId i = 0; i < ds.num_nodes(); ++i) m.id_remap.push_back(i);
  } else {
    m.id_remap = ds.original_ids;
  }
  for (const char* f : kDataFiles) m.sha256[f] = sha256_file(dir / f);
  write_json_file(dir / "manifest.json", Json{{"n", m.n},
                                              {"d", m.d},
                                              {"M", m.M},
                                              {"classes", m.classes},
                                              {"id_remap", m.id_remap},
                                              {"sha256", m.sha256}});
  return m;
}

AttributedGraph load_dataset(const std::filesystem::path& dir) {
  std::optional<DatasetManifest> manifest;
  if (std::filesystem::exists(dir / "manifest.json")) {
    const Json doc = read_json_file(dir / "manifest.json");
    DatasetManifest m;
    try {
      m.n = doc.at("n").get<std::int64_t>();
      m.d = doc.at("d").get<std::int64_t>();
      m.M = doc.at("M").get<int>();
      m.classes = doc.value("classes", std::vector<std::string>{});
      m.id_remap = doc.value("id_remap", std::vector<std::int64_t>{});
      m.sha256 = doc.value("sha256", std::map<std::string, std::string>{});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, "manifest.json: " + std::string(e.what()));
    }
    for (const auto& [file, digest] : m.sha256) {
      if (!std::filesystem::exists(dir / file)) continue;
      if (sha256_file(dir / file) != digest) {
        throw Error(ErrorCode::ChecksumMismatch, file + " does not match its manifest checksum");
      }
    }
    manifest = std::move(m);
  }

  Dataset ds;
  ds.X = parse_features(read_file(dir / "X.csv"), "X.csv");
  const NodeId n = static_cast<NodeId>(ds.X.rows());
  if (manifest) {
    if (manifest->n != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "X.csv has " + std::to_string(n) + " rows, manifest declares " + std::to_string(manifest->n));
    }
    if (n > 0 && manifest->d != ds.X.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "X.csv has " + std::to_string(ds.X.cols()) +
                                                    " columns, manifest declares " + std::to_string(manifest->d));
    }
  }

  const EdgeListFile edges = read_edge_list(dir / "edges.txt");
  if (edges.declared_nodes >= 0 && edges.declared_nodes != n) {
    throw Error(ErrorCode::DimensionMismatch, "edges.txt declares " + std::to_string(edges.declared_nodes) +
                                                  " nodes, X.csv has " + std::to_string(n) + " rows");
  }
  for (std::size_t e = 0; e < edges.pairs.size(); ++e) {
    const auto [u, v] = edges.pairs[e];
    if (u >= n || v >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "edges.txt:" + std::to_string(edges.lines[e]) + ": node id " +
                                                  std::to_string(std::max(u, v)) + " outside [0, " +
                                                  std::to_string(n) + ")");
    }
    if (u == v) {
      throw Error(ErrorCode::SelfLoop, "edges.txt:" + std::to_string(edges.lines[e]) + ": self-loop on node " +
                                           std::to_string(u));
    }
  }
  const Graph full = Graph::from_edges(edges.pairs, n);

  LabelColumn labels = parse_labels(read_file(dir / "y.csv"), "y.csv", n,
                                    manifest && !manifest->classes.empty() ? &manifest->classes : nullptr);
  ds.labels = std::move(labels.labels);
  ds.class_names = std::move(labels.classes);
  ds.num_classes = static_cast<int>(ds.class_names.size());
  if (manifest && manifest->M != ds.num_classes) {
    if (manifest->M < ds.num_classes) {
      throw Error(ErrorCode::DimensionMismatch, "y.csv has " + std::to_string(ds.num_classes) +
                                                    " classes, manifest declares " + std::to_string(manifest->M));
    }
    for (int c = ds.num_classes; c < manifest->M; ++c) ds.class_names.push_back(std::to_string(c));
    ds.num_classes = manifest->M;
  }

  if (std::filesystem::exists(dir / "meta.json")) {
    const Json meta = read_json_file(dir / "meta.json");
    if (meta.contains("synth") && !meta["synth"].is_null()) ds.synth = meta["synth"].get<SynthConfig>();
  }

  if (std::filesystem::exists(dir / "splits.json")) {
    const Json splits = read_json_file(dir / "splits.json");
    ds.train = json_ids(splits, "train", "splits.json");
    ds.val = json_ids(splits, "val", "splits.json");
    ds.test = json_ids(splits, "test", "splits.json");
  } else {
    for (NodeId i = 0; i < n; ++i) ds.test.push_back(i);
  }

  if (manifest && !manifest->id_remap.empty()) {
    if (static_cast<NodeId>(manifest->id_remap.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "manifest id_remap length differs from node count");
    }
    bool identity = true;
    for (NodeId i = 0; i < n && identity; ++i) identity = manifest->id_remap[i] == i;
    if (!identity) ds.original_ids = manifest->id_remap;
  }
  ds.validate();

  AttributedGraph out;
  if (n == 0 || full.is_connected()) {
    out.data = std::move(ds);
    out.graph = full;
    return out;
  }
  ComponentExtraction lcc = extract_largest_component(full);
  out.data = restrict_nodes(ds, lcc.kept);
  out.graph = std::move(lcc.graph);
  out.dropped = std::move(lcc.dropped);
  return out;
}

}  // namespace jane
