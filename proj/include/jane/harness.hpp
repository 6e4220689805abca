#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jane/baselines.hpp"
#include "jane/config_json.hpp"
#include "jane/genmodel.hpp"
#include "jane/trainer.hpp"

namespace jane {

enum class Method { Jane, JaneNU, JaneR, LP };

std::string_view to_string(Method m);
/// Accepts "jane", "jane-nu", "jane-r", "lp". Throws InvalidConfig.
Method parse_method(std::string_view name);

struct SweepSpec {
  std::vector<double> alphas{0.0, 0.5, 1.0};
  std::vector<double> train_fracs{0.05, 0.10, 0.20, 0.30};
  double val_frac = 0.20;
  std::vector<Method> methods{Method::Jane, Method::JaneNU, Method::JaneR, Method::LP};
  int repeats = 5;
  std::uint64_t base_seed = 0;
  /// Worker threads; 0 uses the hardware concurrency.
  int workers = 0;
  SynthConfig synth;  ///< alpha and seed are overridden per cell
  TrainConfig train;  ///< variant and seed are overridden per cell
  LPConfig lp;

  /// Throws InvalidConfig.
  void validate() const;
};

void to_json(Json& j, const SweepSpec& s);
void from_json(const Json& j, SweepSpec& s);

/// One long-format result line. alpha and frac are empty for runs on data
/// that did not come from a sweep cell.
struct ResultRow {
  std::optional<double> alpha;
  std::optional<double> frac;
  std::string method;
  int k = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct CellFailure {
  double alpha = 0.0;
  double frac = 0.0;
  std::string method;
  int repeat = 0;
  std::string error;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
};

/// Seeds of one sweep cell. The dataset depends on (base, alpha, repeat)
/// only, so every method and fraction sees the same graph; the split adds the
/// fraction and the training RNG adds the method.
struct CellSeeds {
  std::uint64_t data = 0;
  std::uint64_t split = 0;
  std::uint64_t train = 0;
};

CellSeeds cell_seeds(std::uint64_t base_seed, double alpha, double frac, Method method, int repeat);

/// Runs one cell in isolation: generate, split, then train or propagate.
ResultRow run_cell(const SweepSpec& spec, double alpha, double frac, Method method, int repeat);

/// Every (alpha, frac, method, repeat) cell on a bounded worker pool. Rows
/// come back in loop order regardless of scheduling; failed cells are listed
/// in `failures` and the rest still complete.
ResultTable run_sweep(const SweepSpec& spec);

/// One JANE training per (k, repeat) on a fixed split. Repeat r trains with
/// seed derive_seed({cfg.seed, r}) for every k, so runs pair across k.
/// Throws KTooLarge when some k exceeds n - 1.
ResultTable run_eig_sensitivity(const AttributedGraph& data, std::span<const int> ks, const TrainConfig& cfg,
                                int repeats = 5);

struct Aggregate {
  std::optional<double> alpha;
  std::optional<double> frac;
  std::string method;
  int k = 0;
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation; 0 for a single run
};

/// Groups rows by (alpha, frac, method, k) in first-appearance order.
std::vector<Aggregate> aggregate(const ResultTable& table);

/// Header plus one line per row: alpha,frac,method,k,seed,accuracy. Reals use
/// the shortest round-trip form; missing alpha/frac are empty fields.
std::string results_csv(const ResultTable& table);

/// Inverse of results_csv. Throws ParseError with line and column.
ResultTable parse_results_csv(std::string_view text, const std::string& source = "results.csv");

/// Writes results.csv, summary.json, and accuracy_alpha_<a>.svg per alpha.
/// Throws PreconditionViolated for an empty table (nothing is written) and
/// IOError on write failure.
void render_outputs(const ResultTable& table, const std::filesystem::path& out_dir);

}  // namespace jane
