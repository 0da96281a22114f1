#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nepembed/model.hpp"
#include "nepembed/train.hpp"

namespace nepembed {

// One declarative document drives a run; every seeded operation derives its
// seed from the single top-level seed.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;

    std::vector<std::filesystem::path> corpus_dirs;
    std::filesystem::path hindi_lexicon;
    std::filesystem::path normalization_map;
    std::filesystem::path suffix_table;
    std::filesystem::path vocab_file;      // optional: empty means train one
    std::filesystem::path checkpoint_file; // optional: empty means initialize
    std::vector<std::filesystem::path> intrinsic_sets;
    std::filesystem::path classification_train; // optional
    std::filesystem::path classification_test;  // optional

    std::string preset = "small"; // small | oracle | custom
    ModelConfig model;            // resolved from the preset
    TrainSpec train;              // train.seed mirrors the top-level seed

    bool operator==(const RunConfig&) const = default;
};

struct ConfigResult {
    RunConfig config;
    std::vector<std::string> errors; // "<location>: <message>" per problem

    bool ok() const { return errors.empty(); }
};

// Defaulting environment for output_dir when the document omits it.
std::filesystem::path default_output_dir();

// Collects every problem instead of stopping at the first; config.output_dir
// is always usable for error reporting even when validation fails.
ConfigResult validate_config_json(const nlohmann::json& doc);
ConfigResult validate_config(const std::filesystem::path& path);

// Throws UsageError on an unreadable file (path named), DataError listing
// every validation problem.
RunConfig load_config(const std::filesystem::path& path);

// Full echo with every default made explicit; validate_config_json of the
// result reproduces the RunConfig exactly.
nlohmann::json run_config_to_json(const RunConfig& config);

// Writes the echo as <output_dir>/config.json.
void write_config_echo(const RunConfig& config);

} // namespace nepembed
