#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "jane/error.hpp"
#include "jane/genmodel.hpp"
#include "support.hpp"

using namespace jane;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IOError;
}

/// Direct product over all pairs, then log.
double brute_log_likelihood(const Graph& g, const Eigen::MatrixXd& U, double s2) {
  const Eigen::MatrixXd A = g.dense_adjacency();
  double total = 0.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < U.rows(); ++j) {
      const double p = std::exp(-(U.row(i) - U.row(j)).squaredNorm() / s2);
      total += std::log(A(i, j) == 1.0 ? p : 1.0 - p);
    }
  }
  return total;
}

struct BlockOracles {
  double x_only;
  double u_only;
  double joint;
};

BlockOracles oracles_for(double alpha, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.alpha = alpha;
  cfg.seed = seed;
  const AttributedGraph ag = generate_synthetic(cfg);
  const Dataset& ds = ag.data;
  std::vector<NodeId> train, test;
  // Stratified folds: alternate within each class.
  std::vector<int> seen(static_cast<std::size_t>(cfg.M), 0);
  for (NodeId i = 0; i < ds.num_nodes(); ++i) (seen[ds.labels[i]]++ % 2 == 0 ? train : test).push_back(i);
  Eigen::MatrixXd joint(ds.num_nodes(), ds.X.cols() + ds.true_U->cols());
  joint << ds.X, *ds.true_U;
  // Two-fold cross-validation, so every node is scored once.
  auto cv = [&](const Eigen::MatrixXd& F) {
    const double a = testing::logistic_oracle(F, ds.labels, cfg.M, train, test);
    const double b = testing::logistic_oracle(F, ds.labels, cfg.M, test, train);
    return (a * test.size() + b * train.size()) / static_cast<double>(ds.num_nodes());
  };
  return {cv(ds.X), cv(*ds.true_U), cv(joint)};
}

double mutual_information(const std::vector<int>& a, int na, const std::vector<int>& b, int nb) {
  std::vector<double> joint(static_cast<std::size_t>(na * nb), 0.0), pa(na, 0.0), pb(nb, 0.0);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[a[i] * nb + b[i]] += 1.0 / n;
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
  }
  double mi = 0.0;
  for (int x = 0; x < na; ++x) {
    for (int y = 0; y < nb; ++y) {
      const double p = joint[x * nb + y];
      if (p > 0.0) mi += p * std::log(p / (pa[x] * pb[y]));
    }
  }
  return mi;
}

}  // namespace

TEST_CASE("edge_prob examples") {
  Eigen::RowVectorXd a(2), b(2);
  a << 1, 2;
  b << 2, 4;
  CHECK(edge_prob(a, a, 1.0) == 1.0);
  CHECK(edge_prob(a, b, 1.0) == Approx(std::exp(-5.0)).epsilon(1e-15));
  CHECK(edge_prob(a, b, 1.0) == Approx(0.0067379).epsilon(1e-5));
  Eigen::RowVectorXd c(2);
  c << 1 + std::sqrt(0.5), 2 + std::sqrt(0.5);  // squared distance 1
  CHECK(edge_prob(a, c, 1.0) == Approx(0.367879).epsilon(1e-6));
  CHECK(edge_prob(a, b, 1.0) == edge_prob(b, a, 1.0));
  CHECK(code_of([&] { edge_prob(a, b, 0.0); }) == ErrorCode::NonPositiveScale);
  CHECK(code_of([&] { edge_prob(a, b, -1.0); }) == ErrorCode::NonPositiveScale);
  CHECK(code_of([&] { edge_prob(a, Eigen::RowVectorXd::Zero(3), 1.0); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("edge_prob decreases with distance") {
  Eigen::RowVectorXd origin = Eigen::RowVectorXd::Zero(2);
  double prev = 2.0;
  for (int step = 0; step < 50; ++step) {
    Eigen::RowVectorXd v(2);
    v << 0.1 * step, 0.05 * step;
    const double p = edge_prob(origin, v, 0.7);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("latent state validation") {
  LatentState s{Eigen::MatrixXd::Zero(3, 2), 0.0};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::NonPositiveScale);
  s.scale_sq = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::NonPositiveScale);
  s.scale_sq = 1.0;
  s.U(1, 1) = std::nan("");
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("sample_graph limits and determinism") {
  Rng rng(30);
  const Graph full = sample_graph(LatentState{Eigen::MatrixXd::Ones(12, 2), 1.0}, rng);
  CHECK(full == testing::complete_graph(12));

  const Eigen::MatrixXd spread = testing::gaussian(30, 2, rng);
  CHECK(sample_graph(LatentState{spread, 1e-12}, rng).num_edges() == 0);

  Rng a(31), b(31);
  const LatentState st{spread, 1.0};
  CHECK(sample_graph(st, a) == sample_graph(st, b));
}

TEST_CASE("within-cluster edge density matches the mean pair probability") {
  Rng rng(32);
  Eigen::MatrixXd U = testing::gaussian(50, 2, rng, 0.5);
  U.bottomRows(25).col(0).array() += 10.0;
  const LatentState st{U, 1.0};
  double expected_pairs = 0.0, var = 0.0, total_pairs = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = i + 1; j < 50; ++j) {
      if ((i < 25) != (j < 25)) continue;
      const double p = edge_prob(U.row(i), U.row(j), 1.0);
      expected_pairs += p;
      var += p * (1.0 - p);
      total_pairs += 1.0;
    }
  }
  constexpr int kSeeds = 200;
  double within = 0.0, across = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    Rng r(1000 + s);
    const Graph g = sample_graph(st, r);
    for (const Edge& e : g.edges()) ((e.u < 25) == (e.v < 25) ? within : across) += 1.0;
  }
  const double empirical = within / (total_pairs * kSeeds);
  const double mean_p = expected_pairs / total_pairs;
  const double se = std::sqrt(var * kSeeds) / (total_pairs * kSeeds);
  CHECK(std::abs(empirical - mean_p) <= 3.0 * se);
  CHECK(across == 0.0);
}

TEST_CASE("log-likelihood examples") {
  const Graph k5 = testing::complete_graph(5);
  CHECK(log_likelihood_adjacency(k5, LatentState{Eigen::MatrixXd::Zero(5, 2), 1.0}) == 0.0);

  Eigen::MatrixXd U(2, 2);
  U << 0, 0, 0.6, 0.8;  // squared distance 1 = s^2
  CHECK(log_likelihood_adjacency(testing::path_graph(2), LatentState{U, 1.0}) == Approx(-1.0).epsilon(1e-15));

  // A non-edge between coincident points is impossible.
  const Graph none = testing::make_graph(2, {});
  CHECK(log_likelihood_adjacency(none, LatentState{Eigen::MatrixXd::Zero(2, 2), 1.0}) ==
        -std::numeric_limits<double>::infinity());

  CHECK(code_of([&] { log_likelihood_adjacency(k5, LatentState{Eigen::MatrixXd::Zero(4, 2), 1.0}); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("log-likelihood equals the brute-force product on small graphs") {
  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    const NodeId n = 2 + t % 7;
    const Graph g = testing::random_graph(n, 0.5, rng);
    const Eigen::MatrixXd U = testing::gaussian(n, 1 + t % 3, rng, 0.7);
    const double s2 = 0.5 + 0.1 * (t % 10);
    CHECK(std::abs(log_likelihood_adjacency(g, LatentState{U, s2}) - brute_log_likelihood(g, U, s2)) <= 1e-10);
  }
}

TEST_CASE("surrogate lower-bounds the exact negative log-likelihood") {
  Rng rng(34);
  for (int t = 0; t < 30; ++t) {
    const Graph g = testing::random_graph(8, 0.4, rng);
    const LatentState st{testing::gaussian(8, 2, rng), 1.0};
    CHECK(adjacency_surrogate(g, st) <= -log_likelihood_adjacency(g, st) + 1e-12);
  }
}

TEST_CASE("synthetic config validation") {
  SynthConfig c;
  c.alpha = 1.5;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = {};
  c.M = 1;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = {};
  c.n = 3;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = {};
  c.d = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = {};
  c.M = 8;  // three code bits need three latent coordinates at alpha = 0
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c.k = 3;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("informative slot allocation") {
  SynthConfig c;
  c.alpha = 0.0;
  CHECK(informative_x_slots(c) == 0);
  CHECK(informative_u_slots(c) == 2);
  c.alpha = 0.5;
  CHECK(informative_x_slots(c) == 1);
  CHECK(informative_u_slots(c) == 1);
  c.alpha = 1.0;
  CHECK(informative_x_slots(c) == 2);
  c.alpha = 0.2;
  CHECK(informative_x_slots(c) == 1);
}

TEST_CASE("block oracles match the alpha design") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CAPTURE(seed);
    const BlockOracles a0 = oracles_for(0.0, seed);
    CHECK(a0.x_only <= 0.35);
    CHECK(a0.u_only >= 0.90);
    const BlockOracles a1 = oracles_for(1.0, seed);
    CHECK(a1.x_only >= 0.90);
    CHECK(a1.u_only <= 0.35);
  }
}

TEST_CASE("one informative block at alpha = 0.5 separates two of four classes") {
  // A single block resolves one label bit, so its accuracy centres on 0.5
  // with a per-dataset spread of about 0.04; the band is checked on the mean.
  constexpr int kDatasets = 10;
  double x_mean = 0.0, u_mean = 0.0;
  for (std::uint64_t seed = 1; seed <= kDatasets; ++seed) {
    CAPTURE(seed);
    const BlockOracles o = oracles_for(0.5, seed);
    CHECK(o.joint >= 0.90);
    CHECK(o.x_only <= 0.80);
    CHECK(o.u_only <= 0.80);
    x_mean += o.x_only / kDatasets;
    u_mean += o.u_only / kDatasets;
  }
  CHECK(x_mean >= 0.45);
  CHECK(x_mean <= 0.80);
  CHECK(u_mean >= 0.45);
  CHECK(u_mean <= 0.80);
}

TEST_CASE("labels are balanced") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n = 203;
    Rng rng(seed);
    const AttributedGraph ag = generate_synthetic(cfg, rng);
    // Before component extraction the counts are exact; afterwards they
    // must stay within 20% of n / M.
    std::map<int, int> counts;
    for (int y : ag.data.labels) ++counts[y];
    const double target = static_cast<double>(ag.data.num_nodes()) / cfg.M;
    for (const auto& [label, count] : counts) CHECK(std::abs(count - target) <= 0.2 * target);
  }
}

TEST_CASE("generator output is self-consistent and reproducible") {
  SynthConfig cfg;
  cfg.seed = 9;
  const AttributedGraph a = generate_synthetic(cfg);
  const AttributedGraph b = generate_synthetic(cfg);
  CHECK(a.graph == b.graph);
  CHECK(a.data.X == b.data.X);
  CHECK(a.data.labels == b.data.labels);
  CHECK(a.graph.is_connected());
  CHECK(a.data.num_nodes() + static_cast<NodeId>(a.dropped.size()) == cfg.n);
  CHECK(a.data.true_U->rows() == a.data.num_nodes());
  CHECK(a.data.synth == cfg);
  CHECK_NOTHROW(a.data.validate());
}

TEST_CASE("labels carry no information about U at alpha = 1 (permutation test)") {
  SynthConfig cfg;
  cfg.alpha = 1.0;
  cfg.seed = 40;
  const AttributedGraph ag = generate_synthetic(cfg);
  const Eigen::MatrixXd& U = *ag.data.true_U;
  const NodeId n = ag.data.num_nodes();
  // Quantize each latent coordinate at its quartiles into a 4 x 4 grid.
  std::vector<int> cell(static_cast<std::size_t>(n), 0);
  for (Eigen::Index c = 0; c < 2; ++c) {
    std::vector<double> sorted(U.col(c).data(), U.col(c).data() + n);
    std::sort(sorted.begin(), sorted.end());
    for (NodeId i = 0; i < n; ++i) {
      int bin = 0;
      for (int q = 1; q < 4; ++q) bin += U(i, c) > sorted[static_cast<std::size_t>(q * n / 4)];
      cell[i] = cell[i] * 4 + bin;
    }
  }
  const double observed = mutual_information(ag.data.labels, cfg.M, cell, 16);
  Rng rng(41);
  std::vector<int> shuffled = ag.data.labels;
  int at_least = 0;
  constexpr int kPerms = 999;
  for (int p = 0; p < kPerms; ++p) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (mutual_information(shuffled, cfg.M, cell, 16) >= observed) ++at_least;
  }
  const double p_value = (1.0 + at_least) / (1.0 + kPerms);
  CHECK(p_value > 0.01);

  // The same statistic does detect dependence at alpha = 0.
  cfg.alpha = 0.0;
  const AttributedGraph dep = generate_synthetic(cfg);
  std::vector<int> sign_cell;
  for (NodeId i = 0; i < dep.data.num_nodes(); ++i) {
    sign_cell.push_back(((*dep.data.true_U)(i, 0) > 0) * 2 + ((*dep.data.true_U)(i, 1) > 0));
  }
  CHECK(mutual_information(dep.data.labels, cfg.M, sign_cell, 4) > 0.5);
}

TEST_CASE("make_splits sizes and stratification") {
  SynthConfig cfg;
  cfg.n = 200;
  cfg.class_sep = 0.0;  // one blob, so nothing is dropped
  cfg.seed = 50;
  AttributedGraph ag = generate_synthetic(cfg);
  REQUIRE(ag.data.num_nodes() == 200);
  Rng rng(51);
  const Dataset ds = make_splits(ag.data, 0.10, 0.20, rng);
  CHECK(ds.train.size() == 20);
  CHECK(ds.val.size() == 40);
  CHECK(ds.test.size() == 140);
  CHECK_NOTHROW(ds.validate());

  cfg.n = 100;
  const AttributedGraph small = generate_synthetic(cfg);
  REQUIRE(small.data.num_nodes() == 100);
  Rng rng2(52);
  const Dataset half = make_splits(small.data, 0.5, 0.25, rng2);
  std::map<int, int> per_class;
  for (NodeId i : half.train) ++per_class[half.labels[i]];
  CHECK(half.train.size() == 50);
  for (const auto& [label, count] : per_class) {
    CHECK(count >= 12);
    CHECK(count <= 13);
  }
}

TEST_CASE("make_splits rejects bad fractions and skips unknown labels") {
  SynthConfig cfg;
  cfg.class_sep = 0.0;
  const AttributedGraph ag = generate_synthetic(cfg);
  Rng rng(53);
  CHECK(code_of([&] { make_splits(ag.data, 0.0, 0.2, rng); }) == ErrorCode::InvalidFraction);
  CHECK(code_of([&] { make_splits(ag.data, 0.6, 0.4, rng); }) == ErrorCode::InvalidFraction);
  CHECK(code_of([&] { make_splits(ag.data, 0.1, -0.1, rng); }) == ErrorCode::InvalidFraction);

  Dataset partial = ag.data;
  for (NodeId i = 0; i < partial.num_nodes(); i += 2) partial.labels[i] = kUnknownLabel;
  const Dataset ds = make_splits(partial, 0.2, 0.2, rng);
  for (NodeId i : ds.train) CHECK(ds.labels[i] != kUnknownLabel);
  for (NodeId i : ds.val) CHECK(ds.labels[i] != kUnknownLabel);
  CHECK(ds.train.size() + ds.val.size() + ds.test.size() == static_cast<std::size_t>(ds.num_nodes()));
}

TEST_CASE("dataset validation") {
  Dataset ds;
  ds.X = Eigen::MatrixXd::Zero(3, 1);
  ds.labels = {0, 1, kUnknownLabel};
  ds.num_classes = 2;
  ds.train = {0};
  ds.test = {1, 2};
  CHECK_NOTHROW(ds.validate());
  Dataset bad = ds;
  bad.labels = {0, 1};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::DimensionMismatch);
  bad = ds;
  bad.labels[1] = 2;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::UnknownLabelValue);
  bad = ds;
  bad.train = {2};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidConfig);
  bad = ds;
  bad.val = {0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ds;
  bad.test = {5};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("restrict_nodes remaps ids and splits") {
  Dataset ds;
  ds.X = Eigen::MatrixXd(4, 1);
  ds.X << 10, 11, 12, 13;
  ds.labels = {0, 1, 0, 1};
  ds.num_classes = 2;
  ds.train = {0, 3};
  ds.test = {1, 2};
  const Dataset r = restrict_nodes(ds, {1, 3});
  CHECK(r.X(0, 0) == 11);
  CHECK(r.X(1, 0) == 13);
  CHECK(r.train == std::vector<NodeId>{1});
  CHECK(r.test == std::vector<NodeId>{0});
  CHECK(r.original_ids == std::vector<std::int64_t>{1, 3});
}
