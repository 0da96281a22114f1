#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nepembed/corpus.hpp"

namespace nepembed {

// Word pattern list used to drop documents that match any entry as a whole
// word. The shipped default list has 100 entries; content is configuration.
struct HindiLexicon {
    std::vector<std::string> entries; // non-empty, unique, no whitespace

    static HindiLexicon load(const std::filesystem::path& path);
    static HindiLexicon from_entries(std::vector<std::string> entries);
};

struct NormalizationRule {
    std::u32string pattern;
    std::u32string replacement; // codepoint count <= pattern's, keeps the pass non-expanding
};

// Ordered rewrite rules on top of the built-in Devanagari canonical
// composition. Applying the full set twice equals applying it once.
struct NormalizationMap {
    std::vector<NormalizationRule> rules;

    // Tab-separated pattern/replacement per line; an absent second field
    // means deletion.
    static NormalizationMap load(const std::filesystem::path& path);
    static NormalizationMap from_rules(std::vector<NormalizationRule> rules);
};

struct SuffixTable {
    std::vector<std::u32string> suffixes; // non-empty, unique
    std::size_t min_stem_len = 2;         // codepoints
    std::size_t max_strips = 2;

    static SuffixTable load(const std::filesystem::path& path, std::size_t min_stem_len = 2,
                            std::size_t max_strips = 2);
    static SuffixTable from_suffixes(std::vector<std::string> suffixes, std::size_t min_stem_len = 2,
                                     std::size_t max_strips = 2);
};

struct FilterDecision {
    bool keep = true;
    std::vector<std::string> matched_words; // distinct lexicon entries found, in occurrence order
};

// Whole-word matching: words are maximal runs of non-separator codepoints,
// separators being whitespace, ASCII punctuation, danda/double danda and
// general punctuation.
FilterDecision match_lexicon(std::string_view doc_text, const HindiLexicon& lexicon);

// Keep advances the document from Raw to Filtered. Throws DataError when the
// document is not at stage Raw.
FilterDecision filter_non_nepali(Corpus& corpus, std::string_view doc_id, const HindiLexicon& lexicon);

// Devanagari canonical composition, then the map rules to a fixpoint, then
// collapse of immediately repeated dependent vowel signs. Idempotent and
// never longer than the input in codepoints.
std::string standardize(std::string_view input, const NormalizationMap& map);

// Splits a whitespace-free word into stem + stripped postpositional suffixes.
// Right-to-left longest match, at most max_strips strips, never leaving the
// stem below min_stem_len codepoints. Concatenating the result reproduces the
// input exactly.
std::vector<std::string> lexical_split(std::string_view word, const SuffixTable& table);

struct PipelineReport {
    std::uint64_t input_count = 0;
    std::uint64_t kept = 0;
    std::uint64_t dropped = 0; // filter stage; later stages never drop

    bool operator==(const PipelineReport&) const = default;
};

struct PipelineResult {
    Corpus corpus; // survivors at stage Lexed
    PipelineReport report;
};

// Full pass: filter, standardize, lexical split. All-or-nothing per
// document; every input document must be at stage Raw.
PipelineResult run_pipeline(const Corpus& corpus, const HindiLexicon& lexicon,
                            const NormalizationMap& map, const SuffixTable& table);

namespace devanagari {

bool is_dependent_vowel_sign(char32_t cp);

// base+nukta pairs composed to their precomposed letters.
std::u32string canonical_compose(std::u32string_view s);

} // namespace devanagari

} // namespace nepembed
