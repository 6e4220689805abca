#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jane/baselines.hpp"
#include "jane/classifier.hpp"
#include "jane/config_json.hpp"
#include "jane/dataset_io.hpp"
#include "jane/genmodel.hpp"
#include "jane/harness.hpp"
#include "jane/spectral.hpp"
#include "jane/trainer.hpp"

namespace {

using namespace jane;

struct GenerateArgs {
  SynthConfig cfg;
  double train_frac = 0.10;
  double val_frac = 0.20;
  std::string out;
};

struct EigsArgs {
  std::string edges;
  int k = 2;
  std::string out;
};

struct TrainArgs {
  std::string data;
  std::string variant = "jane";
  TrainConfig cfg;
  std::string report;
  std::string checkpoint;
};

struct BaselineArgs {
  std::string data;
  std::string method = "lp";
  LPConfig cfg;
  std::string report;
};

struct SweepArgs {
  std::string spec;
  std::string out;
  int workers = -1;
};

struct SensitivityArgs {
  std::string data;
  std::vector<int> ks{1, 2, 3, 4};
  int repeats = 5;
  TrainConfig cfg;
  std::string out;
};

void add_train_options(CLI::App* app, TrainConfig& cfg) {
  app->add_option("--epochs", cfg.epochs, "maximum epochs T")->capture_default_str();
  app->add_option("--lr-w", cfg.lr_w, "Adam learning rate for W")->capture_default_str();
  app->add_option("--lr-u", cfg.lr_u, "gradient step for U")->capture_default_str();
  app->add_option("--dropout", cfg.dropout)->capture_default_str();
  app->add_option("--weight-decay", cfg.weight_decay)->capture_default_str();
  app->add_option("--k", cfg.k, "latent dimension")->capture_default_str();
  app->add_option("--scale-sq", cfg.scale_sq, "s^2 of the adjacency term")->capture_default_str();
  app->add_option("--hidden", cfg.hidden)->capture_default_str();
  app->add_option("--latent-scale", cfg.latent_input_scale, "network input scale for U; 0 = sqrt(n)")
      ->capture_default_str();
  app->add_option("--u-update-every", cfg.u_update_every)->capture_default_str();
  app->add_option("--patience", cfg.early_stop_patience, "early stopping patience; 0 = off")->capture_default_str();
  app->add_option("--seed", cfg.seed)->capture_default_str();
}

int run_generate(const GenerateArgs& a) {
  const AttributedGraph ag = generate_synthetic(a.cfg);
  Rng rng(derive_seed({a.cfg.seed, 0x73706c6974}));
  const Dataset ds = make_splits(ag.data, a.train_frac, a.val_frac, rng);
  save_dataset(ds, ag.graph, a.out);
  std::cout << "wrote " << a.out << ": " << ag.graph.num_nodes() << " nodes, " << ag.graph.num_edges() << " edges";
  if (!ag.dropped.empty()) std::cout << " (" << ag.dropped.size() << " nodes outside the largest component dropped)";
  std::cout << '\n';
  return 0;
}

int run_eigs(const EigsArgs& a) {
  const EdgeListFile file = read_edge_list(a.edges);
  const Graph g = Graph::from_edges(file.pairs, implied_node_count(file));
  const SpectralBasis basis = smallest_nontrivial_eigs(Laplacian(g), a.k);
  std::ofstream fout;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    fout.open(a.out);
    if (!fout) throw Error(ErrorCode::IOError, "cannot write " + a.out);
    out = &fout;
  }
  out->precision(17);
  for (Eigen::Index c = 0; c < basis.eigenvalues.size(); ++c) *out << (c ? "," : "") << basis.eigenvalues(c);
  *out << '\n';
  for (Eigen::Index r = 0; r < basis.eigenvectors.rows(); ++r) {
    for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) *out << (c ? "," : "") << basis.eigenvectors(r, c);
    *out << '\n';
  }
  return 0;
}

int run_train(TrainArgs a) {
  const AttributedGraph ag = load_dataset(a.data);
  a.cfg.variant = parse_variant(a.variant);
  TrainReport report;
  int status = 0;
  try {
    report = train(ag.data, ag.graph, a.cfg);
  } catch (const DivergenceError& e) {
    std::cerr << e.what() << '\n';
    report = e.report();
    status = 3;
  }
  if (!a.report.empty()) write_json_file(a.report, report_json(report));
  if (!a.checkpoint.empty()) save_checkpoint(a.checkpoint, Checkpoint{report.params, report.U, report.latent_input_scale});
  if (status == 0) {
    std::printf("%s: %d epochs, test accuracy %.4f\n", a.variant.c_str(), report.epochs_run, report.test_acc);
  }
  return status;
}

int run_baseline(const BaselineArgs& a) {
  if (a.method != "lp") throw Error(ErrorCode::InvalidConfig, "unknown baseline '" + a.method + "'");
  const AttributedGraph ag = load_dataset(a.data);
  const LPResult res = label_propagation(ag.graph, ag.data.train, ag.data.labels, ag.data.num_classes, a.cfg);
  for (const std::string& w : res.warnings) std::cerr << "warning: " << w << '\n';
  const double acc = accuracy(res.labels, ag.data.labels, ag.data.test);
  if (!a.report.empty()) {
    write_json_file(a.report, Json{{"method", "lp"},
                                   {"config", a.cfg},
                                   {"iterations", res.iterations},
                                   {"converged", res.converged},
                                   {"warnings", res.warnings},
                                   {"test_acc", acc}});
  }
  std::printf("lp: %d iterations, test accuracy %.4f\n", res.iterations, acc);
  return 0;
}

int run_sweep_cmd(const SweepArgs& a) {
  SweepSpec spec = read_json_file(a.spec).get<SweepSpec>();
  if (a.workers >= 0) spec.workers = a.workers;
  const ResultTable table = run_sweep(spec);
  for (const CellFailure& f : table.failures) {
    std::cerr << "cell alpha=" << f.alpha << " frac=" << f.frac << " method=" << f.method << " repeat=" << f.repeat
              << " failed: " << f.error << '\n';
  }
  if (!table.rows.empty()) render_outputs(table, a.out);
  for (const Aggregate& g : aggregate(table)) {
    std::printf("alpha=%-4g frac=%-5g %-8s mean %.4f std %.4f (n=%d)\n", g.alpha.value_or(-1), g.frac.value_or(-1),
                g.method.c_str(), g.mean, g.stddev, g.count);
  }
  return table.failures.empty() ? 0 : 1;
}

int run_sensitivity(const SensitivityArgs& a) {
  const AttributedGraph ag = load_dataset(a.data);
  const ResultTable table = run_eig_sensitivity(ag, a.ks, a.cfg, a.repeats);
  if (!a.out.empty()) render_outputs(table, a.out);
  for (const Aggregate& g : aggregate(table)) {
    std::printf("k=%-3d mean %.4f std %.4f (n=%d)\n", g.k, g.mean, g.stddev, g.count);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint attribute and network embedding toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample a synthetic attributed graph");
  generate->add_option("--n", gen.cfg.n)->capture_default_str();
  generate->add_option("--d", gen.cfg.d)->capture_default_str();
  generate->add_option("--k", gen.cfg.k)->capture_default_str();
  generate->add_option("--M", gen.cfg.M)->capture_default_str();
  generate->add_option("--alpha", gen.cfg.alpha)->capture_default_str();
  generate->add_option("--scale-sq", gen.cfg.scale_sq_gen)->capture_default_str();
  generate->add_option("--class-sep", gen.cfg.class_sep)->capture_default_str();
  generate->add_option("--seed", gen.cfg.seed)->capture_default_str();
  generate->add_option("--train-frac", gen.train_frac)->capture_default_str();
  generate->add_option("--val-frac", gen.val_frac)->capture_default_str();
  generate->add_option("--out", gen.out, "output directory")->required();

  EigsArgs eig;
  auto* eigs = app.add_subcommand("eigs", "smallest nontrivial Laplacian eigenpairs of an edge list");
  eigs->add_option("edges", eig.edges, "edge-list file")->required()->check(CLI::ExistingFile);
  eigs->add_option("--k", eig.k)->capture_default_str();
  eigs->add_option("--out", eig.out, "CSV: eigenvalues, then one row per node");

  TrainArgs tr;
  auto* trainc = app.add_subcommand("train", "train JANE on a dataset directory");
  trainc->add_option("--data", tr.data)->required()->check(CLI::ExistingDirectory);
  trainc->add_option("--variant", tr.variant)->check(CLI::IsMember({"jane", "jane-nu", "jane-r"}))->capture_default_str();
  add_train_options(trainc, tr.cfg);
  trainc->add_option("--report", tr.report, "report JSON");
  trainc->add_option("--checkpoint", tr.checkpoint, "checkpoint JSON");

  BaselineArgs bl;
  auto* baseline = app.add_subcommand("baseline", "run label propagation");
  baseline->add_option("--data", bl.data)->required()->check(CLI::ExistingDirectory);
  baseline->add_option("--method", bl.method)->check(CLI::IsMember({"lp"}))->capture_default_str();
  baseline->add_option("--max-iters", bl.cfg.max_iters)->capture_default_str();
  baseline->add_option("--tol", bl.cfg.tol)->capture_default_str();
  baseline->add_option("--report", bl.report);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "alpha x train-fraction grid");
  sweep->add_option("--spec", sw.spec, "sweep spec JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sw.out, "output directory")->required();
  sweep->add_option("--workers", sw.workers, "override the worker count in the sweep file");

  SensitivityArgs sens;
  auto* sensitivity = app.add_subcommand("sensitivity", "accuracy against the number of eigenvectors");
  sensitivity->add_option("--data", sens.data)->required()->check(CLI::ExistingDirectory);
  sensitivity->add_option("--ks", sens.ks)->delimiter(',')->capture_default_str();
  sensitivity->add_option("--repeats", sens.repeats)->capture_default_str();
  add_train_options(sensitivity, sens.cfg);
  sensitivity->add_option("--out", sens.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return run_generate(gen);
    if (*eigs) return run_eigs(eig);
    if (*trainc) return run_train(tr);
    if (*baseline) return run_baseline(bl);
    if (*sweep) return run_sweep_cmd(sw);
    if (*sensitivity) return run_sensitivity(sens);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
