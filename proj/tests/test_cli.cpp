#include <doctest.h>

#include <nepembed/corpus.hpp>
#include <nepembed/errors.hpp>
#include <nepembed/pipeline.hpp>

#include "test_support.hpp"

#include <json.hpp>

#include <cstdlib>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace nepembed;
using testsupport::TempDir;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string quoted(const std::string& s) { return "'" + s + "'"; }

// Runs the installed binary through the shell, capturing both streams.
CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const std::filesystem::path out_file = scratch / "_stdout";
    const std::filesystem::path err_file = scratch / "_stderr";
    const std::string cmd = std::string(NEPEMBED_CLI_PATH) + " " + args + " >" +
                            quoted(out_file.string()) + " 2>" + quoted(err_file.string());
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = testsupport::read_file(out_file);
    result.err = testsupport::read_file(err_file);
    return result;
}

std::vector<nlohmann::json> parse_ndjson(const std::string& text) {
    std::vector<nlohmann::json> records;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty()) {
            records.push_back(nlohmann::json::parse(line));
        }
    }
    return records;
}

} // namespace

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(sha256_hex("abc", 3) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("", 0) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    TempDir dir("sha256");
    testsupport::write_file(dir / "v.bin", "abc");
    CHECK(sha256_file(dir / "v.bin") == sha256_hex("abc", 3));
    CHECK_THROWS_AS(sha256_file(dir / "absent.bin"), DataError);
}

TEST_CASE("the manifest hashes artifacts under its root and rejects escapes") {
    TempDir dir("manifest");
    testsupport::write_file(dir / "a.txt", "alpha");
    testsupport::write_file(dir / "sub" / "b.txt", "beta");
    testsupport::write_file(dir / "outside.txt", "gamma");

    Manifest manifest(dir / "root");
    std::filesystem::create_directories(dir / "root");
    testsupport::write_file(dir / "root" / "a.txt", "alpha");
    testsupport::write_file(dir / "root" / "sub" / "b.txt", "beta");
    manifest.record(dir / "root" / "a.txt");
    manifest.record(dir / "root" / "sub" / "b.txt");

    REQUIRE(manifest.files().size() == 2);
    CHECK(manifest.files().at("a.txt") == sha256_hex("alpha", 5));
    CHECK(manifest.files().at("sub/b.txt") == sha256_hex("beta", 4));

    CHECK_THROWS_WITH_AS(manifest.record(dir / "outside.txt"),
                         doctest::Contains("escapes the output dir"), DataError);
    CHECK_THROWS_AS(manifest.record(dir / "root" / "ghost.txt"), DataError);

    manifest.write();
    const nlohmann::json doc =
        nlohmann::json::parse(testsupport::read_file(dir / "root" / "manifest.json"));
    CHECK(doc.at("files").size() == 2);
    CHECK(doc.at("files").at("a.txt") == sha256_hex("alpha", 5));
}

TEST_CASE("help and argument errors use the documented exit codes") {
    TempDir dir("cli_exit");

    const CliResult help = run_cli("--help", dir.path);
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("eval-intrinsic") != std::string::npos);
    CHECK(help.out.find("finetune") != std::string::npos);

    const CliResult unknown = run_cli("frobnicate", dir.path);
    CHECK(unknown.exit_code == 1);

    const CliResult bad_preset = run_cli("--preset huge stats", dir.path);
    CHECK(bad_preset.exit_code == 1);
    CHECK(bad_preset.err.find("--preset") != std::string::npos);

    const CliResult missing_required = run_cli("compare --candidate x --oracle y", dir.path);
    CHECK(missing_required.exit_code == 1);
    CHECK(missing_required.err.find("--baseline") != std::string::npos);

    const CliResult no_sub = run_cli("", dir.path);
    CHECK(no_sub.exit_code == 1);
}

TEST_CASE("config problems separate usage errors from data errors") {
    TempDir dir("cli_config");

    const std::string absent = (dir / "absent.json").string();
    const CliResult unreadable = run_cli("--config " + quoted(absent) + " stats", dir.path);
    CHECK(unreadable.exit_code == 1);
    CHECK(unreadable.err.find("cannot read config file") != std::string::npos);
    CHECK(unreadable.err.find("absent.json") != std::string::npos);

    testsupport::write_file(dir / "broken.json", "{not json");
    const CliResult broken =
        run_cli("--config " + quoted((dir / "broken.json").string()) + " stats", dir.path);
    CHECK(broken.exit_code == 2);
    CHECK(broken.err.find("not valid JSON") != std::string::npos);

    testsupport::write_file(dir / "invalid.json", R"({"train": {"mask_prob": 2.0}})");
    const CliResult invalid =
        run_cli("--config " + quoted((dir / "invalid.json").string()) + " stats", dir.path);
    CHECK(invalid.exit_code == 2);
    CHECK(invalid.err.find("invalid config") != std::string::npos);
    CHECK(invalid.err.find("train.mask_prob") != std::string::npos);

    const CliResult no_ckpt = run_cli("embed --text x", dir.path);
    CHECK(no_ckpt.exit_code == 1);
    CHECK(no_ckpt.err.find("no checkpoint given") != std::string::npos);

    const CliResult bad_corpus =
        run_cli("stats --input " + quoted((dir / "nowhere").string()), dir.path);
    CHECK(bad_corpus.exit_code == 2);
}

TEST_CASE("the subcommands chain into a working end-to-end run") {
    TempDir dir("cli_chain");
    const auto data = testsupport::data_dir();

    testsupport::write_file(dir / "source.txt",
                            "क़लमहरू राम्रा छन्\n"
                            "नदी किनारमा माछा छन्\n"
                            "वह बहुत अच्छा है\n"
                            "सहरमा मानिस धेरै छन्\n"
                            "घरको बाटो लामो छ\n"
                            "ऊ भोलि आउँछ\n"
                            "चराहरू आकाशमा उड्छन्\n"
                            "म किताब पढ्छु\n");

    const std::filesystem::path out_dir = dir / "out";
    const nlohmann::json config = {
        {"output_dir", out_dir.generic_string()},
        {"paths",
         {{"hindi_lexicon", (data / "hindi_lexicon.txt").generic_string()},
          {"normalization_map", (data / "normalization_map.tsv").generic_string()},
          {"suffix_table", (data / "suffix_table.txt").generic_string()}}},
        {"model", {{"vocab_size", 120}, {"max_len", 32}}},
        {"train", {{"batch_size", 4}, {"learning_rate", 1e-4}}},
    };
    testsupport::write_file(dir / "config.json", config.dump(2));
    const std::string base = "--config " + quoted((dir / "config.json").string()) + " ";

    const CliResult ingest =
        run_cli(base + "ingest --source " + quoted((dir / "source.txt").string()), dir.path);
    REQUIRE_MESSAGE(ingest.exit_code == 0, ingest.err);
    {
        const auto records = parse_ndjson(ingest.out);
        REQUIRE(records.size() == 1);
        CHECK(records[0].at("op") == "ingest");
        CHECK(records[0].at("documents") == 8);
        CHECK(records[0].at("rejects") == 0);
    }

    const CliResult preprocess = run_cli(base + "preprocess", dir.path);
    REQUIRE_MESSAGE(preprocess.exit_code == 0, preprocess.err);
    {
        const auto records = parse_ndjson(preprocess.out);
        REQUIRE(records.size() == 1);
        CHECK(records[0].at("op") == "preprocess");
        CHECK(records[0].at("input") == 8);
        CHECK(records[0].at("kept") == 7); // the line with Hindi markers drops
        CHECK(records[0].at("dropped") == 1);
    }
    const std::string lexed = testsupport::read_file(out_dir / "corpus" / "lexed.txt");
    CHECK(lexed.find("कलम हरू") != std::string::npos); // nukta folded, suffix split
    CHECK(lexed.find("क़") == std::string::npos);
    CHECK(lexed.find("घर को") != std::string::npos);
    CHECK(lexed.find("है") == std::string::npos);

    const CliResult stats = run_cli(base + "stats", dir.path);
    REQUIRE_MESSAGE(stats.exit_code == 0, stats.err);
    {
        const auto records = parse_ndjson(stats.out);
        REQUIRE(records.size() == 1);
        CHECK(records[0].at("document_count") == 7);
        CHECK(records[0].at("word_token_count").get<std::uint64_t>() > 20);
        CHECK(records[0].at("word_type_count").get<std::uint64_t>() > 10);
    }

    const CliResult vocab = run_cli(base + "train-vocab", dir.path);
    REQUIRE_MESSAGE(vocab.exit_code == 0, vocab.err);
    {
        const auto records = parse_ndjson(vocab.out);
        REQUIRE(records.size() == 1);
        CHECK(records[0].at("op") == "train-vocab");
        CHECK(records[0].at("target") == 120);
        CHECK(records[0].at("size").get<std::uint64_t>() <= 120);
    }
    CHECK(std::filesystem::exists(out_dir / "vocab.txt"));

    const CliResult tune = run_cli(base + "--epochs 1 finetune", dir.path);
    REQUIRE_MESSAGE(tune.exit_code == 0, tune.err);
    {
        const auto records = parse_ndjson(tune.out);
        REQUIRE(records.size() >= 2); // per-step log lines, then the summary
        for (std::size_t i = 0; i + 1 < records.size(); ++i) {
            CHECK(records[i].at("loss").get<double>() > 0.0);
            CHECK(records[i].at("epoch") == 0);
        }
        CHECK(records.back().at("op") == "finetune");
        CHECK(records.back().at("epochs") == 1);
        CHECK(records.back().at("steps").get<std::uint64_t>() >= 1);
    }
    const std::filesystem::path ckpt = out_dir / "checkpoint.nepc";
    REQUIRE(std::filesystem::exists(ckpt));

    const std::string model_flags = "--checkpoint " + quoted(ckpt.string()) + " --vocab " +
                                    quoted((out_dir / "vocab.txt").string());
    const CliResult embed = run_cli(base + "embed " + model_flags + " --text 'नदी'", dir.path);
    REQUIRE_MESSAGE(embed.exit_code == 0, embed.err);
    {
        const auto records = parse_ndjson(embed.out);
        REQUIRE(records.size() == 1);
        CHECK(records[0].at("text") == "नदी");
        CHECK(records[0].at("vector").size() == 300); // small-preset width
    }

    const CliResult eval = run_cli(
        base + "eval-intrinsic " + model_flags + " --set " +
            quoted((data / "fixtures" / "intrinsic_domain.tsv").string()) + " --model-id demo",
        dir.path);
    REQUIRE_MESSAGE(eval.exit_code == 0, eval.err);
    {
        const auto records = parse_ndjson(eval.out);
        REQUIRE(records.size() == 1);
        CHECK(records[0].at("model") == "demo");
        REQUIRE(records[0].at("purity").size() == 1);
        const double purity_value =
            records[0].at("purity").at("intrinsic_domain").get<double>();
        CHECK(purity_value >= 0.0);
        CHECK(purity_value <= 1.0);
        CHECK(records[0].at("average") == purity_value);

        const nlohmann::json report = nlohmann::json::parse(
            testsupport::read_file(out_dir / "report_intrinsic.json"));
        CHECK(report == records[0]);
    }

    // The standalone manifest names the last command's artifact with its hash.
    const nlohmann::json manifest =
        nlohmann::json::parse(testsupport::read_file(out_dir / "manifest.json"));
    REQUIRE(manifest.at("files").contains("report_intrinsic.json"));
    CHECK(manifest.at("files").at("report_intrinsic.json") ==
          sha256_file(out_dir / "report_intrinsic.json"));
}
