#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nepembed/corpus.hpp"

namespace nepembed {

// Subword vocabulary with dense ids. Ids 0-4 are the fixed specials; word
// internal pieces carry the continuation marker prefix.
class Vocab {
public:
    static constexpr std::uint32_t kPad = 0;
    static constexpr std::uint32_t kUnk = 1;
    static constexpr std::uint32_t kCls = 2;
    static constexpr std::uint32_t kSep = 3;
    static constexpr std::uint32_t kMask = 4;
    static constexpr std::size_t kNumSpecials = 5;
    static constexpr const char* kContinuationMarker = "##";

    // Frequency-greedy pair merging until vocab_size is reached or no adjacent
    // pairs remain. Deterministic given (texts, vocab_size). Throws UsageError
    // naming the required minimum when vocab_size cannot hold the alphabet.
    static Vocab train(std::span<const std::string> texts, std::size_t vocab_size);
    static Vocab train(const Corpus& corpus, std::size_t vocab_size);

    // One token per line, line number = id; the first five lines must be the
    // specials.
    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);
    static Vocab from_tokens(std::vector<std::string> tokens);

    std::uint32_t size() const { return static_cast<std::uint32_t>(tokens_.size()); }
    const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    bool is_special(std::uint32_t id) const { return id < kNumSpecials; }
    // -1 when absent.
    std::int64_t find(std::string_view token) const;

    // Greedy longest-match pieces of a single word, continuation-marked after
    // the first piece; unmatched codepoints become UNK.
    std::vector<std::uint32_t> segment_word(std::string_view word) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::size_t max_piece_codepoints_ = 0;

    void rebuild_index();
};

struct Encoded {
    std::vector<std::uint32_t> ids;  // length max_len
    std::vector<std::uint8_t> mask;  // 1 on real tokens, 0 on padding
    std::size_t real_len = 0;        // CLS + pieces + SEP
};

// [CLS] pieces [SEP] padded to max_len; on truncation SEP stays the last real
// token. max_len must be at least 2.
Encoded encode(std::string_view text, const Vocab& vocab, std::size_t max_len);

struct WordSpan {
    std::string word;
    std::size_t begin = 0; // position range within Encoded.ids; empty when truncated away
    std::size_t end = 0;
};

struct EncodedWords {
    Encoded enc;
    std::vector<WordSpan> words;
};

EncodedWords encode_with_words(std::string_view text, const Vocab& vocab, std::size_t max_len);

// Drops specials, merges continuation pieces, single spaces between words.
// Throws DataError on an out-of-range id.
std::string decode(std::span<const std::uint32_t> ids, const Vocab& vocab);

} // namespace nepembed
