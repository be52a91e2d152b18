#pragma once

#include <string>

#include "dabag/eval.hpp"

namespace dabag::cli {

// Parses a classifier name with default hyperparameters.
ClassifierSpec classifier_from_name(const std::string& name);

// Experiment config from JSON text. Unknown keys are rejected so that typos
// do not silently fall back to defaults. Throws UsageError naming `source`.
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace dabag::cli
