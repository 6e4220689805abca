#pragma once

#include <filesystem>

#include <json.hpp>

#include "jane/baselines.hpp"
#include "jane/genmodel.hpp"
#include "jane/trainer.hpp"

namespace jane {

using Json = nlohmann::json;

// Field-for-field JSON mappings. Readers start from the struct defaults,
// override the keys present, reject unknown keys, and validate the result.
// Failures raise InvalidConfig.

void to_json(Json& j, const SynthConfig& c);
void from_json(const Json& j, SynthConfig& c);
void to_json(Json& j, const TrainConfig& c);
void from_json(const Json& j, TrainConfig& c);
void to_json(Json& j, const LPConfig& c);
void from_json(const Json& j, LPConfig& c);

/// {config, epochs: [{epoch, loss, adj_nll, obj, train_acc, val_acc}],
///  initial_objective, latent_input_scale, epochs_run, test_acc, duration_ms}
Json report_json(const TrainReport& report);

/// Throws IOError or ParseError.
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline. Throws IOError.
void write_json_file(const std::filesystem::path& path, const Json& doc);

}  // namespace jane
