#include "jane/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <system_error>
#include <thread>

namespace jane {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Jane: return "jane";
    case Method::JaneNU: return "jane-nu";
    case Method::JaneR: return "jane-r";
    case Method::LP: return "lp";
  }
  return "jane";
}

Method parse_method(std::string_view name) {
  if (name == "jane") return Method::Jane;
  if (name == "jane-nu") return Method::JaneNU;
  if (name == "jane-r") return Method::JaneR;
  if (name == "lp") return Method::LP;
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (alphas.empty() || train_fracs.empty() || methods.empty()) {
    throw Error(ErrorCode::InvalidConfig, "alphas, train_fracs, and methods must be non-empty");
  }
  if (repeats < 1) throw Error(ErrorCode::InvalidConfig, "repeats must be >= 1");
  if (workers < 0) throw Error(ErrorCode::InvalidConfig, "workers must be >= 0");
  for (double a : alphas) {
    SynthConfig probe = synth;
    probe.alpha = a;
    probe.validate();
  }
  for (double f : train_fracs) {
    if (!(f > 0.0 && val_frac >= 0.0 && f + val_frac < 1.0)) {
      throw Error(ErrorCode::InvalidFraction, "train fraction plus val_frac must lie in (0, 1)");
    }
  }
  train.validate();
  lp.validate();
}

void to_json(Json& j, const SweepSpec& s) {
  Json methods = Json::array();
  for (Method m : s.methods) methods.push_back(std::string(to_string(m)));
  j = Json{{"alphas", s.alphas},   {"train_fracs", s.train_fracs}, {"val_frac", s.val_frac},
           {"methods", methods},   {"repeats", s.repeats},         {"base_seed", s.base_seed},
           {"workers", s.workers}, {"synth", s.synth},             {"train", s.train},
           {"lp", s.lp}};
}

void from_json(const Json& j, SweepSpec& s) {
  static constexpr const char* known[] = {"alphas",    "train_fracs", "val_frac", "methods", "repeats",
                                          "base_seed", "workers",     "synth",    "train",   "lp"};
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "sweep spec must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + item.key() + "' in sweep spec");
    }
  }
  try {
    if (j.contains("alphas")) s.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("train_fracs")) s.train_fracs = j["train_fracs"].get<std::vector<double>>();
    if (j.contains("val_frac")) s.val_frac = j["val_frac"].get<double>();
    if (j.contains("repeats")) s.repeats = j["repeats"].get<int>();
    if (j.contains("base_seed")) s.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("workers")) s.workers = j["workers"].get<int>();
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& m : j["methods"]) s.methods.push_back(parse_method(m.get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("sweep spec: ") + e.what());
  }
  if (j.contains("synth")) s.synth = j["synth"].get<SynthConfig>();
  if (j.contains("train")) s.train = j["train"].get<TrainConfig>();
  if (j.contains("lp")) s.lp = j["lp"].get<LPConfig>();
  s.validate();
}

CellSeeds cell_seeds(std::uint64_t base_seed, double alpha, double frac, Method method, int repeat) {
  const auto a = std::bit_cast<std::uint64_t>(alpha);
  const auto f = std::bit_cast<std::uint64_t>(frac);
  const auto r = static_cast<std::uint64_t>(repeat);
  const auto m = static_cast<std::uint64_t>(method);
  return CellSeeds{derive_seed({base_seed, 1, a, r}), derive_seed({base_seed, 2, a, f, r}),
                   derive_seed({base_seed, 3, a, f, m, r})};
}

ResultRow run_cell(const SweepSpec& spec, double alpha, double frac, Method method, int repeat) {
  const CellSeeds seeds = cell_seeds(spec.base_seed, alpha, frac, method, repeat);
  SynthConfig sc = spec.synth;
  sc.alpha = alpha;
  sc.seed = seeds.data;
  const AttributedGraph ag = generate_synthetic(sc);
  Rng split_rng(seeds.split);
  const Dataset ds = make_splits(ag.data, frac, spec.val_frac, split_rng);

  ResultRow row;
  row.alpha = alpha;
  row.frac = frac;
  row.method = std::string(to_string(method));
  row.seed = seeds.train;
  if (method == Method::LP) {
    const LPResult lp = label_propagation(ag.graph, ds.train, ds.labels, ds.num_classes, spec.lp);
    row.accuracy = accuracy(lp.labels, ds.labels, ds.test);
    return row;
  }
  TrainConfig tc = spec.train;
  tc.variant = method == Method::Jane ? Variant::Jane : method == Method::JaneNU ? Variant::JaneNU : Variant::JaneR;
  tc.seed = seeds.train;
  row.k = tc.k;
  row.accuracy = train(ds, ag.graph, tc).test_acc;
  return row;
}

ResultTable run_sweep(const SweepSpec& spec) {
  spec.validate();
  struct Cell {
    double alpha;
    double frac;
    Method method;
    int repeat;
  };
  std::vector<Cell> cells;
  for (double a : spec.alphas) {
    for (double f : spec.train_fracs) {
      for (Method m : spec.methods) {
        for (int r = 0; r < spec.repeats; ++r) cells.push_back({a, f, m, r});
      }
    }
  }

  std::vector<std::optional<ResultRow>> rows(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      try {
        rows[i] = run_cell(spec, c.alpha, c.frac, c.method, c.repeat);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::size_t threads = spec.workers > 0 ? static_cast<std::size_t>(spec.workers)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ResultTable table;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (rows[i]) {
      table.rows.push_back(std::move(*rows[i]));
    } else {
      const Cell& c = cells[i];
      table.failures.push_back({c.alpha, c.frac, std::string(to_string(c.method)), c.repeat, errors[i]});
    }
  }
  return table;
}

ResultTable run_eig_sensitivity(const AttributedGraph& data, std::span<const int> ks, const TrainConfig& cfg,
                                int repeats) {
  if (repeats < 1) throw Error(ErrorCode::InvalidConfig, "repeats must be >= 1");
  const NodeId n = data.graph.num_nodes();
  for (int k : ks) {
    if (k > n - 1) throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds n - 1");
  }
  ResultTable table;
  for (int k : ks) {
    for (int r = 0; r < repeats; ++r) {
      TrainConfig tc = cfg;
      tc.k = k;
      tc.seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(r)});
      ResultRow row;
      if (data.data.synth) row.alpha = data.data.synth->alpha;
      row.method = std::string(to_string(tc.variant));
      row.k = k;
      row.seed = tc.seed;
      row.accuracy = train(data.data, data.graph, tc).test_acc;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<Aggregate> aggregate(const ResultTable& table) {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> values;
  for (const ResultRow& row : table.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.alpha == row.alpha && a.frac == row.frac && a.method == row.method && a.k == row.k;
    });
    if (it == out.end()) {
      out.push_back({row.alpha, row.frac, row.method, row.k, 0, 0.0, 0.0});
      values.emplace_back();
      it = out.end() - 1;
    }
    values[static_cast<std::size_t>(it - out.begin())].push_back(row.accuracy);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& v = values[g];
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[g].count = static_cast<int>(v.size());
    out[g].mean = mean;
    out[g].stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

namespace {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return fields;
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line, std::size_t column,
               const char* what) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError(source, line, column, std::string("invalid ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

constexpr std::string_view kCsvHeader = "alpha,frac,method,k,seed,accuracy";

std::string svg_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '<') {
      out += "&lt;";
    } else if (ch == '>') {
      out += "&gt;";
    } else if (ch == '&') {
      out += "&amp;";
    } else {
      out += ch;
    }
  }
  return out;
}

std::string accuracy_svg(double alpha, const std::vector<Aggregate>& cells) {
  constexpr double W = 520, H = 340, L = 60, R = 130, T = 40, B = 50;
  double fmin = 1.0, fmax = 0.0;
  for (const auto& c : cells) {
    fmin = std::min(fmin, *c.frac);
    fmax = std::max(fmax, *c.frac);
  }
  if (fmax <= fmin) {
    fmin -= 0.05;
    fmax += 0.05;
  }
  auto px = [&](double f) { return L + (f - fmin) / (fmax - fmin) * (W - L - R); };
  auto py = [&](double acc) { return H - B - acc * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">test accuracy, alpha = "
      << format_double(alpha) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double acc = 0.25 * i;
    svg << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(acc) << "\" y2=\"" << py(acc)
        << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << L - 6 << "\" y=\"" << py(acc) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_double(acc) << "</text>\n";
  }
  std::vector<double> fracs;
  for (const auto& c : cells) {
    if (std::find(fracs.begin(), fracs.end(), *c.frac) == fracs.end()) fracs.push_back(*c.frac);
  }
  for (double f : fracs) {
    svg << "<text x=\"" << px(f) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << format_double(f) << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">train fraction</text>\n";

  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::vector<std::string> series;
  for (const auto& c : cells) {
    const std::string key = c.method + (c.k > 0 ? " k=" + std::to_string(c.k) : "");
    if (std::find(series.begin(), series.end(), key) == series.end()) series.push_back(key);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& c : cells) {
      if (c.method + (c.k > 0 ? " k=" + std::to_string(c.k) : "") == series[s]) pts.emplace_back(*c.frac, c.mean);
    }
    std::sort(pts.begin(), pts.end());
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [f, m] : pts) svg << px(f) << ',' << py(m) << ' ';
    svg << "\"/>\n";
    for (const auto& [f, m] : pts) {
      svg << "<circle cx=\"" << px(f) << "\" cy=\"" << py(m) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << W - R + 10 << "\" x2=\"" << W - R + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << svg_escape(series[s])
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string results_csv(const ResultTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const ResultRow& r : table.rows) {
    if (r.alpha) out += format_double(*r.alpha);
    out += ',';
    if (r.frac) out += format_double(*r.frac);
    out += ',' + r.method + ',' + std::to_string(r.k) + ',' + std::to_string(r.seed) + ',' +
           format_double(r.accuracy) + '\n';
  }
  return out;
}

ResultTable parse_results_csv(std::string_view text, const std::string& source) {
  ResultTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError(source, line_no, 1, "expected header '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 6) {
      throw ParseError(source, line_no, 1, "expected 6 fields, found " + std::to_string(f.size()));
    }
    std::size_t col[6];
    col[0] = 1;
    for (int i = 1; i < 6; ++i) col[i] = col[i - 1] + f[i - 1].size() + 1;
    ResultRow row;
    if (!f[0].empty()) row.alpha = parse_number<double>(f[0], source, line_no, col[0], "alpha");
    if (!f[1].empty()) row.frac = parse_number<double>(f[1], source, line_no, col[1], "frac");
    if (f[2].empty()) throw ParseError(source, line_no, col[2], "empty method");
    row.method = std::string(f[2]);
    row.k = parse_number<int>(f[3], source, line_no, col[3], "k");
    row.seed = parse_number<std::uint64_t>(f[4], source, line_no, col[4], "seed");
    row.accuracy = parse_number<double>(f[5], source, line_no, col[5], "accuracy");
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(source, 1, 1, "missing header");
  return table;
}

void render_outputs(const ResultTable& table, const std::filesystem::path& out_dir) {
  if (table.rows.empty()) throw Error(ErrorCode::PreconditionViolated, "cannot render an empty result table");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IOError, "cannot create " + out_dir.string() + ": " + ec.message());

  write_text(out_dir / "results.csv", results_csv(table));

  const std::vector<Aggregate> aggs = aggregate(table);
  Json cells = Json::array();
  for (const Aggregate& a : aggs) {
    cells.push_back({{"alpha", optional_number(a.alpha)},
                     {"frac", optional_number(a.frac)},
                     {"method", a.method},
                     {"k", a.k},
                     {"count", a.count},
                     {"mean", a.mean},
                     {"std", a.stddev}});
  }
  Json failures = Json::array();
  for (const CellFailure& f : table.failures) {
    failures.push_back(
        {{"alpha", f.alpha}, {"frac", f.frac}, {"method", f.method}, {"repeat", f.repeat}, {"error", f.error}});
  }
  write_json_file(out_dir / "summary.json", Json{{"cells", cells}, {"failures", failures}});

  std::vector<double> alphas;
  for (const Aggregate& a : aggs) {
    if (a.alpha && a.frac && std::find(alphas.begin(), alphas.end(), *a.alpha) == alphas.end()) {
      alphas.push_back(*a.alpha);
    }
  }
  for (double alpha : alphas) {
    std::vector<Aggregate> cells_at;
    for (const Aggregate& a : aggs) {
      if (a.alpha == alpha && a.frac) cells_at.push_back(a);
    }
    write_text(out_dir / ("accuracy_alpha_" + format_double(alpha) + ".svg"), accuracy_svg(alpha, cells_at));
  }
}

}  // namespace jane
