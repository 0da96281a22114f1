#include <doctest.h>

#include <nepembed/corpus.hpp>
#include <nepembed/errors.hpp>

#include "test_support.hpp"

#include <json.hpp>

#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nepembed;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

// Independent token/type oracle: C++ stream extraction splits on the same
// ASCII whitespace classes the library uses, but shares no code with it.
std::pair<std::uint64_t, std::uint64_t> stream_count(const std::vector<std::string>& lines) {
    std::uint64_t tokens = 0;
    std::set<std::string> types;
    for (const auto& line : lines) {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            ++tokens;
            types.insert(tok);
        }
    }
    return {tokens, types.size()};
}

} // namespace

TEST_CASE("ingest keeps one document per non-empty line, ids carry file and line number") {
    TempDir dir("corpus_ingest");
    const auto file = dir / "news.txt";
    write_file(file, "पहिलो वाक्य हो ।\n\nदोस्रो वाक्य हो ।\r\n   \nतेस्रो वाक्य\n");

    Corpus c;
    const IngestResult r = c.ingest(file, SourceCategory::Regulated);

    REQUIRE(r.ids.size() == 3);
    CHECK(r.rejects == 0);
    CHECK(r.ids[0] == file.string() + ":1");
    CHECK(r.ids[1] == file.string() + ":3"); // blank line 2 skipped, numbering preserved
    CHECK(r.ids[2] == file.string() + ":5");

    REQUIRE(c.size() == 3);
    CHECK(c.at(0).text == "पहिलो वाक्य हो ।");
    CHECK(c.at(1).text == "दोस्रो वाक्य हो ।"); // CR stripped
    CHECK(c.at(2).text == "तेस्रो वाक्य");
    for (const auto& d : c.documents()) {
        CHECK(d.source_category == SourceCategory::Regulated);
        CHECK(d.stage == IngestStage::Raw);
        CHECK(d.origin == file.string());
    }
}

TEST_CASE("ingest of a directory walks files in sorted name order") {
    TempDir dir("corpus_dir");
    // Created in reverse name order so sortedness is observable.
    write_file(dir / "b.txt", "ख वाक्य\n");
    write_file(dir / "a.txt", "क वाक्य\n");

    Corpus c;
    const IngestResult r = c.ingest(dir.path, SourceCategory::Unregulated);

    REQUIRE(r.ids.size() == 2);
    CHECK(c.at(0).origin == (dir / "a.txt").string());
    CHECK(c.at(1).origin == (dir / "b.txt").string());
    CHECK(c.at(0).text == "क वाक्य");
}

TEST_CASE("invalid UTF-8 lines are rejected and counted, never ingested") {
    TempDir dir("corpus_utf8");
    const auto file = dir / "mixed.txt";
    std::string body = "राम्रो लाइन\n";
    body += "broken \xC0\xAF line\n"; // overlong encoding
    body += "\x80 stray continuation\n";
    body += "अर्को राम्रो लाइन\n";
    write_file(file, body);

    Corpus c;
    const IngestResult r = c.ingest(file, SourceCategory::Regulated);

    CHECK(r.rejects == 2);
    REQUIRE(r.ids.size() == 2);
    CHECK(c.at(0).text == "राम्रो लाइन");
    CHECK(c.at(1).text == "अर्को राम्रो लाइन");
}

TEST_CASE("ingest of a missing path throws DataError naming it") {
    Corpus c;
    CHECK_THROWS_WITH_AS(c.ingest("/nonexistent/corpus/file.txt", SourceCategory::Regulated),
                         doctest::Contains("/nonexistent/corpus/file.txt"), DataError);
}

TEST_CASE("add rejects a colliding document id") {
    Corpus c;
    c.add({"doc-1", "एउटा", SourceCategory::Regulated, "test", IngestStage::Raw});
    CHECK_THROWS_WITH_AS(c.add({"doc-1", "अर्को", SourceCategory::Regulated, "test", IngestStage::Raw}),
                         doctest::Contains("doc-1"), DataError);
    CHECK(c.size() == 1);
}

TEST_CASE("stage transitions move forward only and replace text") {
    Corpus c;
    c.add({"d", "कच्चा पाठ", SourceCategory::Regulated, "test", IngestStage::Raw});

    c.advance_stage("d", IngestStage::Filtered, "छानिएको पाठ");
    CHECK(c.at(0).stage == IngestStage::Filtered);
    CHECK(c.at(0).text == "छानिएको पाठ");

    // Same stage is allowed (idempotent re-run), backward is not.
    c.advance_stage("d", IngestStage::Filtered, "छानिएको पाठ");
    c.advance_stage("d", IngestStage::Lexed, "छानि एको पाठ");
    CHECK_THROWS_AS(c.advance_stage("d", IngestStage::Standardized, "x"), DataError);
    CHECK(c.at(0).text == "छानि एको पाठ");

    CHECK_THROWS_WITH_AS(c.advance_stage("ghost", IngestStage::Lexed, "x"),
                         doctest::Contains("ghost"), DataError);
    CHECK_THROWS_AS(c.advance_stage("d", IngestStage::Lexed, std::string("\xFF\xFE", 2)), DataError);
}

TEST_CASE("stats counts whitespace-delimited tokens and distinct types") {
    Corpus c;
    CHECK(c.stats() == CorpusStats{0, 0, 0});

    const std::vector<std::string> lines = {
        "घर घर जान्छ",
        "घर आउँछ ऊ",
        "ऊ जान्छ",
    };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        c.add({"d" + std::to_string(i), lines[i], SourceCategory::Regulated, "test", IngestStage::Raw});
    }

    const CorpusStats s = c.stats();
    CHECK(s.document_count == 3);
    CHECK(s.word_token_count == 8);
    CHECK(s.word_type_count == 4); // घर जान्छ आउँछ ऊ

    const auto [oracle_tokens, oracle_types] = stream_count(lines);
    CHECK(s.word_token_count == oracle_tokens);
    CHECK(s.word_type_count == oracle_types);
}

TEST_CASE("stats agrees with a stream-extraction oracle on the shipped fixture corpus") {
    Corpus c;
    c.ingest(testsupport::fixture("corpus_regulated"), SourceCategory::Regulated);
    c.ingest(testsupport::fixture("corpus_unregulated"), SourceCategory::Unregulated);

    std::vector<std::string> lines;
    for (const auto& d : c.documents()) {
        lines.push_back(d.text);
    }
    const auto [oracle_tokens, oracle_types] = stream_count(lines);

    const CorpusStats s = c.stats();
    CHECK(s.document_count == 50);
    CHECK(s.word_token_count == oracle_tokens);
    CHECK(s.word_type_count == oracle_types);
    CHECK(s.word_type_count <= s.word_token_count);
    CHECK(s.word_type_count > 0);
}

TEST_CASE("stats_to_json carries the three counters verbatim") {
    const std::string j = stats_to_json({12, 7, 3});
    const auto doc = nlohmann::json::parse(j);
    CHECK(doc.at("word_token_count") == 12);
    CHECK(doc.at("word_type_count") == 7);
    CHECK(doc.at("document_count") == 3);
    CHECK(doc.size() == 3);
}

TEST_CASE("merge is token-additive and order-preserving") {
    Corpus a;
    a.add({"a0", "नदी बग्छ", SourceCategory::Regulated, "t", IngestStage::Raw});
    a.add({"a1", "नदी सङ्लो छ", SourceCategory::Regulated, "t", IngestStage::Raw});
    Corpus b;
    b.add({"b0", "सहर ठूलो छ", SourceCategory::Unregulated, "t", IngestStage::Raw});

    const Corpus m = Corpus::merge(a, b);
    CHECK(m.size() == a.size() + b.size());
    CHECK(m.at(0).id == "a0");
    CHECK(m.at(2).id == "b0");

    const CorpusStats sa = a.stats();
    const CorpusStats sb = b.stats();
    const CorpusStats sm = m.stats();
    CHECK(sm.document_count == sa.document_count + sb.document_count);
    CHECK(sm.word_token_count == sa.word_token_count + sb.word_token_count);
    // Types overlap ("छ" occurs on both sides) so the type count is strictly
    // sub-additive here and bounded below by either side.
    CHECK(sm.word_type_count < sa.word_type_count + sb.word_type_count);
    CHECK(sm.word_type_count >= std::max(sa.word_type_count, sb.word_type_count));
}

TEST_CASE("merge-derived composition table stays consistent with per-source rows") {
    // Two sources with distinct categories; the combined row of a composition
    // table must equal the column-wise sum of the source rows for documents
    // and tokens, with no document counted twice.
    Corpus regulated;
    regulated.ingest(testsupport::fixture("corpus_regulated"), SourceCategory::Regulated);
    Corpus unregulated;
    unregulated.ingest(testsupport::fixture("corpus_unregulated"), SourceCategory::Unregulated);

    const Corpus combined = Corpus::merge(regulated, unregulated);
    const CorpusStats total = combined.stats();
    CHECK(total.document_count ==
          regulated.stats().document_count + unregulated.stats().document_count);
    CHECK(total.word_token_count ==
          regulated.stats().word_token_count + unregulated.stats().word_token_count);

    std::uint64_t reg_docs = 0;
    std::uint64_t unreg_docs = 0;
    for (const auto& d : combined.documents()) {
        (d.source_category == SourceCategory::Regulated ? reg_docs : unreg_docs) += 1;
    }
    CHECK(reg_docs == regulated.size());
    CHECK(unreg_docs == unregulated.size());
}

TEST_CASE("merge refuses id collisions") {
    Corpus a;
    a.add({"same", "क", SourceCategory::Regulated, "t", IngestStage::Raw});
    Corpus b;
    b.add({"same", "ख", SourceCategory::Regulated, "t", IngestStage::Raw});
    CHECK_THROWS_WITH_AS(Corpus::merge(a, b), doctest::Contains("same"), DataError);
}

TEST_CASE("save/load round-trips documents, categories, origins and stages") {
    Corpus c;
    c.add({"r0", "नियमन गरिएको पाठ", SourceCategory::Regulated, "src/a.txt", IngestStage::Raw});
    c.add({"u0", "अनौपचारिक पाठ", SourceCategory::Unregulated, "src/b.txt", IngestStage::Filtered});
    c.add({"u1", "मानक बनाइएको पाठ", SourceCategory::Unregulated, "src/b.txt", IngestStage::Standardized});
    c.add({"r1", "टुक्र्या इएको पाठ", SourceCategory::Regulated, "src/a.txt", IngestStage::Lexed});

    TempDir dir("corpus_roundtrip");
    c.save(dir.path);

    CHECK(std::filesystem::exists(dir / "meta.json"));
    CHECK(read_file(dir / "raw.txt") == "नियमन गरिएको पाठ\n");
    CHECK(read_file(dir / "lexed.txt") == "टुक्र्या इएको पाठ\n");

    const Corpus back = Corpus::load(dir.path);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.at(i).id == c.at(i).id);
        CHECK(back.at(i).text == c.at(i).text);
        CHECK(back.at(i).source_category == c.at(i).source_category);
        CHECK(back.at(i).origin == c.at(i).origin);
        CHECK(back.at(i).stage == c.at(i).stage);
    }
    CHECK(back.stats() == c.stats());
}

TEST_CASE("save rejects embedded newlines; load rejects corrupt metadata") {
    Corpus c;
    c.add({"bad", "दुई\nलाइन", SourceCategory::Regulated, "t", IngestStage::Raw});
    TempDir dir("corpus_badsave");
    CHECK_THROWS_WITH_AS(c.save(dir.path), doctest::Contains("bad"), DataError);

    write_file(dir / "broken" / "meta.json", "{not json");
    CHECK_THROWS_AS(Corpus::load(dir / "broken"), DataError);
    CHECK_THROWS_AS(Corpus::load(dir / "missing"), DataError);
}

TEST_CASE("category and stage names round-trip through their string forms") {
    for (auto c : {SourceCategory::Regulated, SourceCategory::Unregulated}) {
        CHECK(source_category_from_string(to_string(c)) == c);
    }
    for (auto s : {IngestStage::Raw, IngestStage::Filtered, IngestStage::Standardized,
                   IngestStage::Lexed}) {
        CHECK(ingest_stage_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(source_category_from_string("Mystery"), DataError);
    CHECK_THROWS_AS(ingest_stage_from_string("Backwards"), DataError);
}
