#pragma once

#include <string>

#include "cornerseg/pipeline.hpp"
#include "cornerseg/synth.hpp"
#include "cornerseg/targets.hpp"

namespace cornerseg::cli {

/// Everything a subcommand can be configured with. Defaults are the
/// published detector settings.
struct RunConfig {
    PipelineConfig pipeline;
    DefaultBoxConfig default_boxes;
    double match_threshold = kDefaultMatchThreshold;
    SynthConfig synth;
};

/// Parses a JSON document with optional top-level sections "pipeline",
/// "default_boxes", "targets" and "synth". Unknown keys anywhere raise
/// ConfigError naming the key path; missing keys keep their defaults.
RunConfig parse_run_config(const std::string& json_text, const std::string& source);
RunConfig load_run_config(const std::string& path);

/// Full document with every key, suitable as a template.
std::string dump_run_config(const RunConfig& cfg);

}  // namespace cornerseg::cli
