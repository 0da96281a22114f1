#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nepembed {

enum class SourceCategory { Regulated, Unregulated };
enum class IngestStage { Raw, Filtered, Standardized, Lexed };

std::string_view to_string(SourceCategory c);
std::string_view to_string(IngestStage s);
SourceCategory source_category_from_string(std::string_view s);
IngestStage ingest_stage_from_string(std::string_view s);

struct Document {
    std::string id;
    std::string text; // valid UTF-8, enforced at ingest
    SourceCategory source_category = SourceCategory::Regulated;
    std::string origin;
    IngestStage stage = IngestStage::Raw;
};

struct CorpusStats {
    std::uint64_t word_token_count = 0;
    std::uint64_t word_type_count = 0;
    std::uint64_t document_count = 0;

    bool operator==(const CorpusStats&) const = default;
};

std::string stats_to_json(const CorpusStats& stats);

struct IngestResult {
    std::vector<std::string> ids; // input order
    std::uint64_t rejects = 0;    // invalid-UTF-8 lines skipped, never silently dropped
};

// In-memory document collection with insertion order. Thread contract: a
// corpus is single-writer / multi-reader; reads (stats, iteration, at) are
// const and may run concurrently.
class Corpus {
public:
    // One document per non-empty line. `path` may be a file or a directory of
    // files (walked in sorted order). Throws DataError on an unreadable path.
    IngestResult ingest(const std::filesystem::path& path, SourceCategory category);

    // Throws DataError on id collision, naming the colliding id.
    void add(Document doc);

    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    const Document& at(std::size_t index) const { return docs_.at(index); }
    const Document* find(std::string_view id) const;

    const std::vector<Document>& documents() const { return docs_; }

    // Stage transitions move only forward Raw -> Filtered -> Standardized -> Lexed.
    // Throws DataError on a backward transition or unknown id.
    void advance_stage(std::string_view id, IngestStage new_stage, std::string new_text);

    CorpusStats stats() const;

    // Token additivity is exact; throws DataError naming the first colliding id.
    static Corpus merge(const Corpus& a, const Corpus& b);

    // Directory layout: one newline-delimited text file per stage present
    // (raw.txt, filtered.txt, standardized.txt, lexed.txt) plus meta.json
    // mapping id -> (category, origin, stage) in insertion order.
    void save(const std::filesystem::path& dir) const;
    static Corpus load(const std::filesystem::path& dir);

private:
    IngestResult ingest_file(const std::filesystem::path& file, SourceCategory category);

    std::vector<Document> docs_;
};

} // namespace nepembed
