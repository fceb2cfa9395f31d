/*
 * Copyright (c) 2026, SGKL developers.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "sgkl/experiments.hpp"
#include "sgkl/learner.hpp"

#include <json.hpp>

#include <string>

namespace sgkl {

// Missing keys keep the values already present in the target, so a config
// file only needs the settings it changes. Unknown keys are rejected.
nlohmann::json learner_config_to_json(const SgklConfig& cfg);
SgklConfig learner_config_from_json(const nlohmann::json& j, SgklConfig base = {});

nlohmann::json synthetic_setup_to_json(const SyntheticSetup& setup);
SyntheticSetup synthetic_setup_from_json(const nlohmann::json& j, SyntheticSetup base = {});

/// {"learner": {...}, "synthetic": {...}}
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
/// Parses text; malformed JSON and bad values raise ErrorCode::config.
ExperimentConfig parse_experiment_config(const std::string& text);

}  // namespace sgkl
