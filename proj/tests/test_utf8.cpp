#include <doctest.h>

#include <string>

#include "nepembed/errors.hpp"
#include "nepembed/rng.hpp"
#include "nepembed/utf8.hpp"

using namespace nepembed;

TEST_CASE("utf8: decode/encode round-trips Devanagari") {
    const std::string s = "नेपाली भाषा। ३४";
    const std::u32string cps = utf8::decode(s);
    CHECK(utf8::encode(cps) == s);
    CHECK(utf8::count_codepoints(s) == cps.size());
}

TEST_CASE("utf8: fuzzed codepoint strings survive encode/decode") {
    Rng rng(0x757466383131ULL);
    for (int trial = 0; trial < 500; ++trial) {
        std::u32string cps;
        const std::size_t n = 1 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) {
            // Mix ASCII, Devanagari, and astral-plane codepoints; skip the
            // surrogate block.
            switch (rng.below(3)) {
            case 0: cps.push_back(static_cast<char32_t>(0x20 + rng.below(0x5f))); break;
            case 1: cps.push_back(static_cast<char32_t>(0x900 + rng.below(0x80))); break;
            default: cps.push_back(static_cast<char32_t>(0x10000 + rng.below(0x400))); break;
            }
        }
        CHECK(utf8::decode(utf8::encode(cps)) == cps);
    }
}

TEST_CASE("utf8: invalid sequences are rejected") {
    CHECK_FALSE(utf8::is_valid("\x80"));              // stray continuation
    CHECK_FALSE(utf8::is_valid("\xc0\xaf"));          // overlong '/'
    CHECK_FALSE(utf8::is_valid("\xe0\x80\x80"));      // overlong NUL
    CHECK_FALSE(utf8::is_valid("\xed\xa0\x80"));      // surrogate D800
    CHECK_FALSE(utf8::is_valid("\xf4\x90\x80\x80"));  // past U+10FFFF
    CHECK_FALSE(utf8::is_valid("\xe0\xa4"));          // truncated
    CHECK(utf8::is_valid("\xf4\x8f\xbf\xbf"));        // U+10FFFF itself
    CHECK_THROWS_AS((void)utf8::decode("\x80"), DataError);
    CHECK_FALSE(utf8::try_decode("\xc0\xaf").has_value());
}

TEST_CASE("utf8: encode_one produces the expected byte lengths") {
    CHECK(utf8::encode_one(U'a').size() == 1);
    CHECK(utf8::encode_one(U'é').size() == 2);
    CHECK(utf8::encode_one(U'न').size() == 3);
    CHECK(utf8::encode_one(U'\U0001F600').size() == 4);
}

TEST_CASE("text: whitespace splitting and normalization") {
    const auto fields = text::split_whitespace("  एक\tदुई \n तीन  ");
    REQUIRE(fields.size() == 3);
    CHECK(fields[0] == "एक");
    CHECK(fields[2] == "तीन");
    CHECK(text::whitespace_normalize("  एक\tदुई \n तीन  ") == "एक दुई तीन");
    CHECK(text::whitespace_normalize("   ") == "");
    CHECK(text::split_whitespace("").empty());
}
