#include "nepembed/utf8.hpp"

#include "nepembed/errors.hpp"

namespace nepembed::utf8 {

namespace {

// Decodes one codepoint starting at i; returns false on malformed input.
bool decode_at(std::string_view s, std::size_t& i, char32_t& out) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        out = b0;
        i += 1;
        return true;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07u;
    } else {
        return false; // stray continuation byte or invalid lead
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        return false; // truncated
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) {
            return false;
        }
        cp = (cp << 6) | (b & 0x3Fu);
    }
    static constexpr char32_t kMinForLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len]) {
        return false; // overlong
    }
    if (cp >= 0xD800 && cp <= 0xDFFF) {
        return false; // surrogate
    }
    if (cp > 0x10FFFF) {
        return false;
    }
    out = cp;
    i += static_cast<std::size_t>(len);
    return true;
}

} // namespace

bool is_valid(std::string_view bytes) {
    std::size_t i = 0;
    char32_t cp = 0;
    while (i < bytes.size()) {
        if (!decode_at(bytes, i, cp)) {
            return false;
        }
    }
    return true;
}

std::optional<std::u32string> try_decode(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    char32_t cp = 0;
    while (i < bytes.size()) {
        if (!decode_at(bytes, i, cp)) {
            return std::nullopt;
        }
        out.push_back(cp);
    }
    return out;
}

std::u32string decode(std::string_view bytes) {
    auto result = try_decode(bytes);
    if (!result) {
        throw DataError("invalid UTF-8 input");
    }
    return std::move(*result);
}

std::string encode_one(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

std::string encode(std::u32string_view codepoints) {
    std::string out;
    out.reserve(codepoints.size() * 3);
    for (char32_t cp : codepoints) {
        out += encode_one(cp);
    }
    return out;
}

std::size_t count_codepoints(std::string_view bytes) {
    return decode(bytes).size();
}

} // namespace nepembed::utf8

namespace nepembed::text {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) {
            ++i;
        }
        if (i > start) {
            fields.push_back(s.substr(start, i - start));
        }
    }
    return fields;
}

std::string whitespace_normalize(std::string_view s) {
    std::string out;
    bool first = true;
    for (auto field : split_whitespace(s)) {
        if (!first) {
            out.push_back(' ');
        }
        out.append(field);
        first = false;
    }
    return out;
}

} // namespace nepembed::text
