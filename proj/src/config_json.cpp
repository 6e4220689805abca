#include "jane/config_json.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <initializer_list>
#include <string>

namespace jane {

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || item.key() == k;
    if (!found) throw Error(ErrorCode::InvalidConfig, std::string("unknown key '") + item.key() + "' in " + what);
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "': " + e.what());
  }
}

std::string_view optimizer_name(WeightOptimizer o) { return o == WeightOptimizer::Adam ? "adam" : "gd"; }

}  // namespace

void to_json(Json& j, const SynthConfig& c) {
  j = Json{{"n", c.n},
           {"d", c.d},
           {"k", c.k},
           {"M", c.M},
           {"alpha", c.alpha},
           {"scale_sq", c.scale_sq_gen},
           {"class_sep", c.class_sep},
           {"seed", c.seed}};
}

void from_json(const Json& j, SynthConfig& c) {
  reject_unknown(j, {"n", "d", "k", "M", "alpha", "scale_sq", "class_sep", "seed"}, "synth config");
  read_field(j, "n", c.n);
  read_field(j, "d", c.d);
  read_field(j, "k", c.k);
  read_field(j, "M", c.M);
  read_field(j, "alpha", c.alpha);
  read_field(j, "scale_sq", c.scale_sq_gen);
  read_field(j, "class_sep", c.class_sep);
  read_field(j, "seed", c.seed);
  c.validate();
}

void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"epochs", c.epochs},
           {"lr_w", c.lr_w},
           {"lr_u", c.lr_u},
           {"dropout", c.dropout},
           {"weight_decay", c.weight_decay},
           {"k", c.k},
           {"scale_sq", c.scale_sq},
           {"hidden", c.hidden},
           {"latent_input_scale", c.latent_input_scale},
           {"variant", std::string(to_string(c.variant))},
           {"seed", c.seed},
           {"early_stop_patience", c.early_stop_patience},
           {"u_update_every", c.u_update_every},
           {"optimizer", std::string(optimizer_name(c.optimizer))},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps}};
}

void from_json(const Json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"epochs", "lr_w", "lr_u", "dropout", "weight_decay", "k", "scale_sq", "hidden",
                  "latent_input_scale", "variant", "seed", "early_stop_patience", "u_update_every", "optimizer",
                  "adam_beta1", "adam_beta2", "adam_eps"},
                 "train config");
  read_field(j, "epochs", c.epochs);
  read_field(j, "lr_w", c.lr_w);
  read_field(j, "lr_u", c.lr_u);
  read_field(j, "dropout", c.dropout);
  read_field(j, "weight_decay", c.weight_decay);
  read_field(j, "k", c.k);
  read_field(j, "scale_sq", c.scale_sq);
  read_field(j, "hidden", c.hidden);
  read_field(j, "latent_input_scale", c.latent_input_scale);
  read_field(j, "seed", c.seed);
  read_field(j, "early_stop_patience", c.early_stop_patience);
  read_field(j, "u_update_every", c.u_update_every);
  read_field(j, "adam_beta1", c.adam_beta1);
  read_field(j, "adam_beta2", c.adam_beta2);
  read_field(j, "adam_eps", c.adam_eps);
  std::string name;
  read_field(j, "variant", name);
  if (!name.empty()) c.variant = parse_variant(name);
  name.clear();
  read_field(j, "optimizer", name);
  if (name == "adam") {
    c.optimizer = WeightOptimizer::Adam;
  } else if (name == "gd") {
    c.optimizer = WeightOptimizer::GradientDescent;
  } else if (!name.empty()) {
    throw Error(ErrorCode::InvalidConfig, "optimizer must be \"adam\" or \"gd\"");
  }
  c.validate();
}

void to_json(Json& j, const LPConfig& c) { j = Json{{"max_iters", c.max_iters}, {"tol", c.tol}}; }

void from_json(const Json& j, LPConfig& c) {
  reject_unknown(j, {"max_iters", "tol"}, "lp config");
  read_field(j, "max_iters", c.max_iters);
  read_field(j, "tol", c.tol);
  c.validate();
}

Json report_json(const TrainReport& report) {
  Json epochs = Json::array();
  for (const EpochRecord& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"loss", e.loss},
                      {"adj_nll", e.adj_nll},
                      {"obj", e.objective},
                      {"train_acc", e.train_acc},
                      {"val_acc", e.val_acc}});
  }
  return Json{{"config", report.config},
              {"epochs", std::move(epochs)},
              {"initial_objective", report.initial_objective},
              {"latent_input_scale", report.latent_input_scale},
              {"epochs_run", report.epochs_run},
              {"test_acc", report.test_acc},
              {"duration_ms", report.wall_ms}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // nlohmann reports a 1-based byte offset; turn it into line and column.
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(path.string(), line, column, e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

}  // namespace jane
