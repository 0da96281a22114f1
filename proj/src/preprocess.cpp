#include "nepembed/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "nepembed/errors.hpp"
#include "nepembed/utf8.hpp"

namespace nepembed {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(), text::is_space);
}

} // namespace

namespace devanagari {

bool is_dependent_vowel_sign(char32_t cp) {
    return (cp >= 0x093E && cp <= 0x094C) || cp == 0x093A || cp == 0x093B || cp == 0x094E ||
           cp == 0x094F || (cp >= 0x0955 && cp <= 0x0957) || cp == 0x0962 || cp == 0x0963;
}

namespace {

// Precomposed form for base+nukta, 0 when the pair does not compose.
char32_t compose_nukta(char32_t base) {
    switch (base) {
    case 0x0928: return 0x0929; // ऩ
    case 0x0930: return 0x0931; // ऱ
    case 0x0933: return 0x0934; // ऴ
    case 0x0915: return 0x0958; // क़
    case 0x0916: return 0x0959; // ख़
    case 0x0917: return 0x095A; // ग़
    case 0x091C: return 0x095B; // ज़
    case 0x0921: return 0x095C; // ड़
    case 0x0922: return 0x095D; // ढ़
    case 0x092B: return 0x095E; // फ़
    case 0x092F: return 0x095F; // य़
    default: return 0;
    }
}

constexpr char32_t kNukta = 0x093C;

} // namespace

std::u32string canonical_compose(std::u32string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i + 1] == kNukta) {
            if (const char32_t composed = compose_nukta(s[i]); composed != 0) {
                out.push_back(composed);
                ++i;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

} // namespace devanagari

HindiLexicon HindiLexicon::from_entries(std::vector<std::string> entries) {
    std::unordered_set<std::string_view> seen;
    for (const auto& e : entries) {
        if (e.empty()) {
            throw DataError("lexicon entry is empty");
        }
        if (has_whitespace(e)) {
            throw DataError("lexicon entry contains whitespace: " + e);
        }
        if (!utf8::is_valid(e)) {
            throw DataError("lexicon entry is not valid UTF-8");
        }
        if (!seen.insert(e).second) {
            throw DataError("duplicate lexicon entry: " + e);
        }
    }
    HindiLexicon lex;
    lex.entries = std::move(entries);
    return lex;
}

HindiLexicon HindiLexicon::load(const std::filesystem::path& path) {
    std::vector<std::string> entries;
    for (auto& line : read_lines(path)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        entries.push_back(std::move(line));
    }
    return from_entries(std::move(entries));
}

NormalizationMap NormalizationMap::from_rules(std::vector<NormalizationRule> rules) {
    // Rules are matched against canonically composed text, so fold the rules
    // themselves into that space; a decomposed pattern could never match.
    for (auto& r : rules) {
        r.pattern = devanagari::canonical_compose(r.pattern);
        r.replacement = devanagari::canonical_compose(r.replacement);
    }
    for (const auto& r : rules) {
        if (r.pattern.empty()) {
            throw DataError("normalization rule has an empty pattern");
        }
        if (r.replacement.size() > r.pattern.size()) {
            throw DataError("normalization rule expands its pattern: " + utf8::encode(r.pattern));
        }
        if (r.replacement.find(r.pattern) != std::u32string::npos) {
            throw DataError("normalization rule replacement contains its own pattern: " +
                            utf8::encode(r.pattern));
        }
    }
    NormalizationMap map;
    map.rules = std::move(rules);
    return map;
}

NormalizationMap NormalizationMap::load(const std::filesystem::path& path) {
    std::vector<NormalizationRule> rules;
    for (const auto& line : read_lines(path)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        NormalizationRule rule;
        if (tab == std::string::npos) {
            rule.pattern = utf8::decode(line);
        } else {
            rule.pattern = utf8::decode(line.substr(0, tab));
            rule.replacement = utf8::decode(line.substr(tab + 1));
        }
        rules.push_back(std::move(rule));
    }
    return from_rules(std::move(rules));
}

SuffixTable SuffixTable::from_suffixes(std::vector<std::string> suffixes, std::size_t min_stem_len,
                                       std::size_t max_strips) {
    if (min_stem_len == 0) {
        throw DataError("min_stem_len must be positive");
    }
    SuffixTable table;
    table.min_stem_len = min_stem_len;
    table.max_strips = max_strips;
    std::unordered_set<std::string> seen;
    for (const auto& s : suffixes) {
        if (s.empty()) {
            throw DataError("suffix entry is empty");
        }
        if (has_whitespace(s)) {
            throw DataError("suffix entry contains whitespace: " + s);
        }
        if (!seen.insert(s).second) {
            throw DataError("duplicate suffix entry: " + s);
        }
        table.suffixes.push_back(utf8::decode(s));
    }
    return table;
}

SuffixTable SuffixTable::load(const std::filesystem::path& path, std::size_t min_stem_len,
                              std::size_t max_strips) {
    std::vector<std::string> suffixes;
    for (auto& line : read_lines(path)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        suffixes.push_back(std::move(line));
    }
    return from_suffixes(std::move(suffixes), min_stem_len, max_strips);
}

namespace {

bool is_word_separator(char32_t cp) {
    if (cp < 0x80) {
        const bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
        return !alnum;
    }
    if (cp == 0x00A0) {
        return true;
    }
    if (cp >= 0x2000 && cp <= 0x206F) {
        return true; // general punctuation, incl. quotes and dashes
    }
    return cp == 0x0964 || cp == 0x0965 || cp == 0x0970; // danda, double danda, abbreviation sign
}

} // namespace

FilterDecision match_lexicon(std::string_view doc_text, const HindiLexicon& lexicon) {
    std::unordered_set<std::string_view> entry_set(lexicon.entries.begin(), lexicon.entries.end());

    FilterDecision decision;
    std::unordered_set<std::string> reported;
    const std::u32string cps = utf8::decode(doc_text);
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && is_word_separator(cps[i])) {
            ++i;
        }
        const std::size_t start = i;
        while (i < cps.size() && !is_word_separator(cps[i])) {
            ++i;
        }
        if (i > start) {
            const std::string word = utf8::encode(std::u32string_view(cps).substr(start, i - start));
            if (entry_set.contains(word) && reported.insert(word).second) {
                decision.matched_words.push_back(word);
            }
        }
    }
    decision.keep = decision.matched_words.empty();
    return decision;
}

FilterDecision filter_non_nepali(Corpus& corpus, std::string_view doc_id, const HindiLexicon& lexicon) {
    const Document* doc = corpus.find(doc_id);
    if (doc == nullptr) {
        throw DataError("unknown document id: " + std::string(doc_id));
    }
    if (doc->stage != IngestStage::Raw) {
        throw DataError("document is not at stage raw: " + doc->id);
    }
    FilterDecision decision = match_lexicon(doc->text, lexicon);
    if (decision.keep) {
        corpus.advance_stage(doc_id, IngestStage::Filtered, doc->text);
    }
    return decision;
}

namespace {

// One composition + rules + repeat-collapse round.
std::u32string standardize_round(std::u32string s, const NormalizationMap& map) {
    s = devanagari::canonical_compose(s);

    for (int pass = 0; pass < 16; ++pass) {
        bool changed = false;
        for (const auto& rule : map.rules) {
            std::size_t pos = 0;
            while ((pos = s.find(rule.pattern, pos)) != std::u32string::npos) {
                s.replace(pos, rule.pattern.size(), rule.replacement);
                pos += rule.replacement.size();
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        if (pass == 15) {
            throw DataError("normalization rules do not reach a fixpoint");
        }
    }

    std::u32string collapsed;
    collapsed.reserve(s.size());
    for (char32_t cp : s) {
        if (!collapsed.empty() && collapsed.back() == cp && devanagari::is_dependent_vowel_sign(cp)) {
            continue;
        }
        collapsed.push_back(cp);
    }
    return collapsed;
}

} // namespace

std::string standardize(std::string_view input, const NormalizationMap& map) {
    std::u32string s = utf8::decode(input);
    for (int round = 0; round < 16; ++round) {
        std::u32string next = standardize_round(s, map);
        if (next == s) {
            return utf8::encode(s);
        }
        s = std::move(next);
    }
    throw DataError("standardization does not reach a fixpoint");
}

std::vector<std::string> lexical_split(std::string_view word, const SuffixTable& table) {
    if (has_whitespace(word)) {
        throw UsageError("lexical_split word contains whitespace");
    }
    const std::u32string cps = utf8::decode(word);

    std::size_t end = cps.size();
    std::vector<std::u32string_view> stripped; // right-to-left order
    for (std::size_t strip = 0; strip < table.max_strips; ++strip) {
        const std::u32string_view remaining(cps.data(), end);
        const std::u32string* best = nullptr;
        for (const auto& suffix : table.suffixes) {
            if (suffix.size() >= remaining.size()) {
                continue; // stem must stay non-degenerate
            }
            if (remaining.size() - suffix.size() < table.min_stem_len) {
                continue;
            }
            if (remaining.substr(remaining.size() - suffix.size()) != suffix) {
                continue;
            }
            if (best == nullptr || suffix.size() > best->size()) {
                best = &suffix;
            }
        }
        if (best == nullptr) {
            break;
        }
        end -= best->size();
        stripped.emplace_back(cps.data() + end, best->size());
    }

    std::vector<std::string> tokens;
    tokens.push_back(utf8::encode(std::u32string_view(cps.data(), end)));
    for (auto it = stripped.rbegin(); it != stripped.rend(); ++it) {
        tokens.push_back(utf8::encode(*it));
    }
    return tokens;
}

PipelineResult run_pipeline(const Corpus& corpus, const HindiLexicon& lexicon,
                            const NormalizationMap& map, const SuffixTable& table) {
    PipelineResult result;
    result.report.input_count = corpus.size();
    for (const auto& doc : corpus.documents()) {
        if (doc.stage != IngestStage::Raw) {
            throw DataError("pipeline input document is not at stage raw: " + doc.id);
        }
        const FilterDecision decision = match_lexicon(doc.text, lexicon);
        if (!decision.keep) {
            ++result.report.dropped;
            continue;
        }
        const std::string standardized = standardize(doc.text, map);
        std::string lexed;
        for (auto word : text::split_whitespace(standardized)) {
            for (const auto& token : lexical_split(word, table)) {
                if (!lexed.empty()) {
                    lexed.push_back(' ');
                }
                lexed += token;
            }
        }
        Document out = doc;
        out.stage = IngestStage::Lexed;
        out.text = std::move(lexed);
        result.corpus.add(std::move(out));
        ++result.report.kept;
    }
    return result;
}

} // namespace nepembed
