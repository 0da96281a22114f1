#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "nepembed/config.hpp"

namespace nepembed {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file(const std::filesystem::path& path);

// Records every artifact a run writes, keyed by its path relative to the
// output dir, and lands as <output_dir>/manifest.json.
class Manifest {
public:
    explicit Manifest(std::filesystem::path root);

    // The file must already exist and live under the root.
    void record(const std::filesystem::path& file);
    void write() const;

    const std::map<std::string, std::string>& files() const { return files_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::string> files_; // relative path -> sha256
};

struct PipelineOutcome {
    std::map<std::string, std::string> artifacts; // relative path -> sha256
};

// The full run: ingest, filter/standardize/split, vocabulary, fine-tuning,
// perplexity, evaluation reports, vectors, config echo, manifest. Progress
// goes to `ndjson` one JSON record per line; `human` gets a short summary
// per stage. Every artifact lands under config.output_dir.
PipelineOutcome run_all(const RunConfig& config, std::ostream& ndjson, std::ostream& human);

} // namespace nepembed
