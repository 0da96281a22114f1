#include "nepembed/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "nepembed/errors.hpp"
#include "nepembed/utf8.hpp"

namespace nepembed {

namespace {

constexpr const char* kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
const std::string kMarker = Vocab::kContinuationMarker;

bool has_marker(std::string_view s) {
    return s.size() > kMarker.size() && s.compare(0, kMarker.size(), kMarker) == 0;
}

} // namespace

void Vocab::rebuild_index() {
    index_.clear();
    max_piece_codepoints_ = 0;
    for (std::uint32_t id = 0; id < tokens_.size(); ++id) {
        const std::string& tok = tokens_[id];
        if (!index_.emplace(tok, id).second) {
            throw DataError("duplicate token in vocabulary: " + tok);
        }
        if (id >= kNumSpecials) {
            std::string_view body = tok;
            if (has_marker(body)) {
                body.remove_prefix(kMarker.size());
            }
            max_piece_codepoints_ = std::max(max_piece_codepoints_, utf8::count_codepoints(body));
        }
    }
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kNumSpecials) {
        throw DataError("vocabulary is missing the special tokens");
    }
    for (std::size_t i = 0; i < kNumSpecials; ++i) {
        if (tokens[i] != kSpecials[i]) {
            throw DataError("vocabulary line " + std::to_string(i) + " must be " +
                            std::string(kSpecials[i]) + ", found " + tokens[i]);
        }
    }
    Vocab v;
    v.tokens_ = std::move(tokens);
    v.rebuild_index();
    return v;
}

Vocab Vocab::train(const Corpus& corpus, std::size_t vocab_size) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& d : corpus.documents()) {
        texts.push_back(d.text);
    }
    return train(texts, vocab_size);
}

Vocab Vocab::train(std::span<const std::string> texts, std::size_t vocab_size) {
    // Words as symbol sequences: bare first codepoint, marker-prefixed rest.
    struct WordEntry {
        std::vector<std::string> symbols;
        std::uint64_t count = 0;
    };
    std::vector<WordEntry> words;
    std::unordered_map<std::string, std::size_t> word_index;
    for (const auto& t : texts) {
        for (auto w : text::split_whitespace(t)) {
            auto [it, inserted] = word_index.emplace(std::string(w), words.size());
            if (inserted) {
                WordEntry entry;
                const std::u32string cps = utf8::decode(w);
                for (std::size_t i = 0; i < cps.size(); ++i) {
                    std::string sym = i == 0 ? "" : kMarker;
                    sym += utf8::encode_one(cps[i]);
                    entry.symbols.push_back(std::move(sym));
                }
                words.push_back(std::move(entry));
            }
            words[it->second].count += 1;
        }
    }
    if (words.empty()) {
        throw UsageError("cannot train a vocabulary on an empty corpus");
    }

    std::set<std::string> alphabet;
    for (const auto& w : words) {
        alphabet.insert(w.symbols.begin(), w.symbols.end());
    }
    const std::size_t minimum = kNumSpecials + alphabet.size();
    if (vocab_size < minimum) {
        throw UsageError("vocab_size " + std::to_string(vocab_size) +
                         " is below the required minimum " + std::to_string(minimum) +
                         " (5 specials + " + std::to_string(alphabet.size()) + " alphabet symbols)");
    }

    std::vector<std::string> tokens(std::begin(kSpecials), std::end(kSpecials));
    tokens.insert(tokens.end(), alphabet.begin(), alphabet.end());
    std::set<std::string> token_set(tokens.begin(), tokens.end());

    while (tokens.size() < vocab_size) {
        // Pair counts in a std::map: ties resolve to the lexicographically
        // smallest pair, independent of insertion order.
        std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
        for (const auto& w : words) {
            for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
                pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
            }
        }
        if (pair_counts.empty()) {
            break; // no merges remain
        }
        const std::pair<std::string, std::string>* best = nullptr;
        std::uint64_t best_count = 0;
        for (const auto& [pair, count] : pair_counts) {
            if (count > best_count) {
                best = &pair;
                best_count = count;
            }
        }

        // The right half is always word-internal; the merge keeps the left
        // half's position form.
        std::string merged = best->first + best->second.substr(kMarker.size());
        for (auto& w : words) {
            std::vector<std::string> next;
            next.reserve(w.symbols.size());
            std::size_t i = 0;
            while (i < w.symbols.size()) {
                if (i + 1 < w.symbols.size() && w.symbols[i] == best->first &&
                    w.symbols[i + 1] == best->second) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(w.symbols[i]);
                    ++i;
                }
            }
            w.symbols = std::move(next);
        }
        if (token_set.insert(merged).second) {
            tokens.push_back(std::move(merged));
        }
    }
    return from_tokens(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    for (const auto& t : tokens_) {
        out << t << "\n";
    }
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            throw DataError("empty token at vocabulary line " + std::to_string(tokens.size()));
        }
        if (!utf8::is_valid(line)) {
            throw DataError("invalid UTF-8 at vocabulary line " + std::to_string(tokens.size()));
        }
        tokens.push_back(std::move(line));
    }
    return from_tokens(std::move(tokens));
}

std::int64_t Vocab::find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::vector<std::uint32_t> Vocab::segment_word(std::string_view word) const {
    const std::u32string cps = utf8::decode(word);
    std::vector<std::uint32_t> out;
    std::size_t pos = 0;
    while (pos < cps.size()) {
        const std::size_t longest = std::min(cps.size() - pos, max_piece_codepoints_);
        std::int64_t id = -1;
        std::size_t taken = 1;
        for (std::size_t len = longest; len >= 1; --len) {
            std::string candidate = pos > 0 ? kMarker : "";
            candidate += utf8::encode(std::u32string_view(cps).substr(pos, len));
            if (const std::int64_t found = find(candidate); found >= 0) {
                id = found;
                taken = len;
                break;
            }
        }
        out.push_back(id >= 0 ? static_cast<std::uint32_t>(id) : kUnk);
        pos += taken;
    }
    return out;
}

namespace {

Encoded frame_pieces(const std::vector<std::uint32_t>& pieces, std::size_t max_len) {
    Encoded enc;
    const std::size_t kept = std::min(pieces.size(), max_len - 2);
    enc.ids.reserve(max_len);
    enc.ids.push_back(Vocab::kCls);
    enc.ids.insert(enc.ids.end(), pieces.begin(), pieces.begin() + static_cast<std::ptrdiff_t>(kept));
    enc.ids.push_back(Vocab::kSep);
    enc.real_len = enc.ids.size();
    enc.ids.resize(max_len, Vocab::kPad);
    enc.mask.assign(max_len, 0);
    std::fill(enc.mask.begin(), enc.mask.begin() + static_cast<std::ptrdiff_t>(enc.real_len), 1);
    return enc;
}

} // namespace

Encoded encode(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 2) {
        throw UsageError("max_len must be at least 2 to hold CLS and SEP");
    }
    std::vector<std::uint32_t> pieces;
    for (auto word : text::split_whitespace(text)) {
        const auto ids = vocab.segment_word(word);
        pieces.insert(pieces.end(), ids.begin(), ids.end());
    }
    return frame_pieces(pieces, max_len);
}

EncodedWords encode_with_words(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 2) {
        throw UsageError("max_len must be at least 2 to hold CLS and SEP");
    }
    EncodedWords out;
    std::vector<std::uint32_t> pieces;
    for (auto word : text::split_whitespace(text)) {
        const auto ids = vocab.segment_word(word);
        WordSpan span;
        span.word = std::string(word);
        span.begin = 1 + pieces.size(); // CLS occupies position 0
        span.end = span.begin + ids.size();
        out.words.push_back(std::move(span));
        pieces.insert(pieces.end(), ids.begin(), ids.end());
    }
    out.enc = frame_pieces(pieces, max_len);
    // Clamp spans to the kept range; fully truncated words become empty spans.
    const std::size_t last_real = out.enc.real_len - 1; // SEP position
    for (auto& span : out.words) {
        span.begin = std::min(span.begin, last_real);
        span.end = std::min(span.end, last_real);
    }
    return out;
}

std::string decode(std::span<const std::uint32_t> ids, const Vocab& vocab) {
    std::vector<std::string> words;
    for (const std::uint32_t id : ids) {
        if (id >= vocab.size()) {
            throw DataError("token id out of range: " + std::to_string(id));
        }
        if (vocab.is_special(id)) {
            continue;
        }
        const std::string& tok = vocab.token(id);
        if (has_marker(tok) && !words.empty()) {
            words.back() += tok.substr(kMarker.size());
        } else if (has_marker(tok)) {
            words.push_back(tok.substr(kMarker.size()));
        } else {
            words.push_back(tok);
        }
    }
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += words[i];
    }
    return out;
}

} // namespace nepembed
