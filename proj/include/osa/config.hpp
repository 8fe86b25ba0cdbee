#ifndef OSA_CONFIG_HPP
#define OSA_CONFIG_HPP

#include <string>

#include "osa/experiment.hpp"
#include "osa/pipeline.hpp"
#include "osa/synth.hpp"

namespace osa {

// Everything configurable in one place; the CLI reads a flat key=value file
// ('#' comments, blank lines allowed) on top of these defaults. Unknown keys
// are usage errors.
struct FullConfig {
  RunConfig run;
  FilterConfig filter;
  IngestConfig ingest;
  CohortParams cohort;
};

FullConfig default_config();

// Applies one key=value pair. Errors: UnknownConfigKey, InvalidConfig.
void apply_config_entry(FullConfig& cfg, const std::string& key, const std::string& value);

// Parses a config file into cfg. Errors: MissingFile, UnknownConfigKey,
// InvalidConfig.
void load_config_file(FullConfig& cfg, const std::string& path);

}  // namespace osa

#endif  // OSA_CONFIG_HPP
