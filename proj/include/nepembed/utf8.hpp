#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nepembed::utf8 {

// Strict UTF-8: rejects overlong forms, surrogates, codepoints past U+10FFFF,
// truncated sequences and stray continuation bytes.
bool is_valid(std::string_view bytes);

// Throws DataError on invalid input.
std::u32string decode(std::string_view bytes);

std::optional<std::u32string> try_decode(std::string_view bytes);

std::string encode(std::u32string_view codepoints);
std::string encode_one(char32_t cp);

std::size_t count_codepoints(std::string_view bytes);

} // namespace nepembed::utf8

namespace nepembed::text {

bool is_space(char c);

// Fields of a string split on ASCII whitespace runs; empty fields never occur.
std::vector<std::string_view> split_whitespace(std::string_view s);

// Fields re-joined with single spaces.
std::string whitespace_normalize(std::string_view s);

} // namespace nepembed::text
