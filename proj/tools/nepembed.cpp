#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nepembed/config.hpp"
#include "nepembed/errors.hpp"
#include "nepembed/evaluation.hpp"
#include "nepembed/pipeline.hpp"
#include "nepembed/preprocess.hpp"

namespace {

using namespace nepembed;

void emit(const nlohmann::json& record) { std::cout << record.dump() << "\n"; }

bool inside(const std::filesystem::path& root, const std::filesystem::path& p) {
    const std::filesystem::path rel = std::filesystem::relative(
        std::filesystem::weakly_canonical(p), std::filesystem::weakly_canonical(root));
    return !rel.empty() && !rel.native().starts_with("..");
}

// Standalone subcommands track whatever they wrote under the output dir.
void finish_manifest(const RunConfig& cfg, const std::vector<std::filesystem::path>& files) {
    Manifest manifest(cfg.output_dir);
    bool any = false;
    for (const auto& f : files) {
        if (inside(cfg.output_dir, f)) {
            manifest.record(f);
            any = true;
        }
    }
    if (any) {
        manifest.write();
    }
}

Vocab load_vocab_at(const std::filesystem::path& path) {
    if (path.empty()) {
        throw UsageError("no vocabulary file given (flag --vocab or config paths.vocab)");
    }
    return Vocab::load(path);
}

Checkpoint load_checkpoint_at(const std::filesystem::path& path) {
    if (path.empty()) {
        throw UsageError("no checkpoint given (flag --checkpoint or config paths.checkpoint)");
    }
    return load_checkpoint(path);
}

std::vector<LabeledItems> load_sets(const std::vector<std::filesystem::path>& paths) {
    if (paths.empty()) {
        throw UsageError("no labeled sets given (flag --set or config paths.intrinsic_sets)");
    }
    std::vector<LabeledItems> sets;
    for (const auto& p : paths) {
        sets.push_back(load_labeled_items(p, p.stem().string()));
    }
    return sets;
}

struct Cli {
    std::string config_path = "config.json";
    bool config_given = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string preset;
    std::uint64_t epochs = 0;
    bool epochs_given = false;

    // The document is loaded lazily so `--help` never touches the filesystem.
    RunConfig load() const {
        nlohmann::json doc = nlohmann::json::object();
        if (config_given || std::filesystem::exists(config_path)) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) {
                throw UsageError("cannot read config file: " + config_path);
            }
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw DataError(config_path + " is not valid JSON: " + std::string(e.what()));
            }
        }
        if (!doc.is_object()) {
            throw DataError(config_path + ": expected a JSON object");
        }
        if (seed_given) {
            doc["seed"] = seed;
        }
        if (!preset.empty()) {
            doc["model"]["preset"] = preset;
        }
        if (epochs_given) {
            doc["train"]["epochs"] = epochs;
        }
        ConfigResult result = validate_config_json(doc);
        if (!result.ok()) {
            std::string joined = "invalid config:";
            for (const auto& e : result.errors) {
                joined += "\n  " + e;
            }
            throw DataError(joined);
        }
        return result.config;
    }
};

PipelineResult preprocess_corpus(const RunConfig& cfg, const Corpus& corpus) {
    const HindiLexicon lexicon =
        cfg.hindi_lexicon.empty() ? HindiLexicon{} : HindiLexicon::load(cfg.hindi_lexicon);
    const NormalizationMap map = cfg.normalization_map.empty()
                                     ? NormalizationMap{}
                                     : NormalizationMap::load(cfg.normalization_map);
    const SuffixTable suffixes =
        cfg.suffix_table.empty() ? SuffixTable{} : SuffixTable::load(cfg.suffix_table);
    return run_pipeline(corpus, lexicon, map, suffixes);
}

int cmd_ingest(const Cli& cli, const std::vector<std::string>& sources, std::string output) {
    const RunConfig cfg = cli.load();
    std::vector<std::filesystem::path> dirs(sources.begin(), sources.end());
    if (dirs.empty()) {
        dirs = cfg.corpus_dirs;
    }
    if (dirs.empty()) {
        throw UsageError("no sources given (flag --source or config paths.corpus_dirs)");
    }
    Corpus corpus;
    std::uint64_t rejects = 0;
    for (const auto& dir : dirs) {
        const std::string name = dir.filename().string();
        const SourceCategory category = name.find("unregulated") != std::string::npos
                                            ? SourceCategory::Unregulated
                                            : SourceCategory::Regulated;
        rejects += corpus.ingest(dir, category).rejects;
    }
    const std::filesystem::path out =
        output.empty() ? cfg.output_dir / "corpus_raw" : std::filesystem::path(output);
    corpus.save(out);
    emit({{"op", "ingest"}, {"documents", corpus.size()}, {"rejects", rejects}});
    std::cerr << "ingested " << corpus.size() << " documents into " << out.string() << " ("
              << rejects << " rejected lines)\n";
    std::vector<std::filesystem::path> written;
    for (const auto& entry : std::filesystem::directory_iterator(out)) {
        written.push_back(entry.path());
    }
    finish_manifest(cfg, written);
    return 0;
}

int cmd_preprocess(const Cli& cli, std::string input, std::string output) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path in =
        input.empty() ? cfg.output_dir / "corpus_raw" : std::filesystem::path(input);
    const std::filesystem::path out =
        output.empty() ? cfg.output_dir / "corpus" : std::filesystem::path(output);
    const Corpus corpus = Corpus::load(in);
    PipelineResult result = preprocess_corpus(cfg, corpus);
    result.corpus.save(out);
    emit({{"op", "preprocess"},
          {"input", result.report.input_count},
          {"kept", result.report.kept},
          {"dropped", result.report.dropped}});
    std::cerr << "kept " << result.report.kept << " of " << result.report.input_count
              << " documents into " << out.string() << "\n";
    std::vector<std::filesystem::path> written;
    for (const auto& entry : std::filesystem::directory_iterator(out)) {
        written.push_back(entry.path());
    }
    finish_manifest(cfg, written);
    return 0;
}

int cmd_stats(const Cli& cli, std::string input) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path in =
        input.empty() ? cfg.output_dir / "corpus" : std::filesystem::path(input);
    const Corpus corpus = Corpus::load(in);
    std::cout << stats_to_json(corpus.stats()) << "\n";
    std::cerr << corpus.size() << " documents\n";
    return 0;
}

int cmd_train_vocab(const Cli& cli, std::string input, std::string output, std::uint64_t size) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path in =
        input.empty() ? cfg.output_dir / "corpus" : std::filesystem::path(input);
    const std::filesystem::path out =
        output.empty() ? cfg.output_dir / "vocab.txt" : std::filesystem::path(output);
    const Corpus corpus = Corpus::load(in);
    const std::size_t target = size > 0 ? size : cfg.model.vocab_size;
    const Vocab vocab = Vocab::train(corpus, target);
    std::filesystem::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    vocab.save(out);
    emit({{"op", "train-vocab"}, {"size", vocab.size()}, {"target", target}});
    std::cerr << "vocabulary of " << vocab.size() << " tokens into " << out.string() << "\n";
    finish_manifest(cfg, {out});
    return 0;
}

int cmd_finetune(const Cli& cli, std::string corpus_dir, std::string vocab_path,
                 std::string ckpt_in, std::string ckpt_out) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path corpus_at =
        corpus_dir.empty() ? cfg.output_dir / "corpus" : std::filesystem::path(corpus_dir);
    const std::filesystem::path vocab_at =
        vocab_path.empty() ? (cfg.vocab_file.empty() ? cfg.output_dir / "vocab.txt"
                                                     : cfg.vocab_file)
                           : std::filesystem::path(vocab_path);
    const Corpus corpus = Corpus::load(corpus_at);
    const Vocab vocab = load_vocab_at(vocab_at);

    Checkpoint start;
    const std::filesystem::path resume =
        !ckpt_in.empty() ? std::filesystem::path(ckpt_in) : cfg.checkpoint_file;
    if (!resume.empty()) {
        start = load_checkpoint(resume);
    } else {
        ModelConfig model_cfg = cfg.model;
        model_cfg.vocab_size = vocab.size();
        start = init_checkpoint(model_cfg, cfg.seed);
    }
    if (start.config.vocab_size != vocab.size()) {
        throw DataError("checkpoint vocabulary size " + std::to_string(start.config.vocab_size) +
                        " does not match the vocabulary (" + std::to_string(vocab.size()) + ")");
    }

    FinetuneOptions opts;
    opts.log = &std::cout;
    const Checkpoint trained = finetune(start, corpus, vocab, cfg.train, opts);
    const std::filesystem::path out =
        ckpt_out.empty() ? cfg.output_dir / "checkpoint.nepc" : std::filesystem::path(ckpt_out);
    std::filesystem::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    save_checkpoint(trained, out);
    emit({{"op", "finetune"}, {"epochs", cfg.train.epochs}, {"steps", trained.step}});
    std::cerr << "fine-tuned for " << cfg.train.epochs << " epochs into " << out.string() << "\n";
    finish_manifest(cfg, {out});
    return 0;
}

int cmd_embed(const Cli& cli, std::string ckpt, std::string vocab_path, std::string text,
              std::string word, const std::vector<std::string>& contexts, std::string items,
              std::string output) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path vocab_at =
        vocab_path.empty() ? cfg.vocab_file : std::filesystem::path(vocab_path);
    const Checkpoint checkpoint =
        load_checkpoint_at(!ckpt.empty() ? std::filesystem::path(ckpt) : cfg.checkpoint_file);
    const Embedder embedder(checkpoint, load_vocab_at(vocab_at));

    const int modes = (!text.empty() ? 1 : 0) + (!word.empty() ? 1 : 0) + (!items.empty() ? 1 : 0);
    if (modes != 1) {
        throw UsageError("give exactly one of --text, --word, or --items");
    }
    if (!text.empty()) {
        const Eigen::VectorXd v = embedder.embed_sentence(text);
        nlohmann::json vec = nlohmann::json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            vec.push_back(v(i));
        }
        emit({{"op", "embed"}, {"text", text}, {"vector", vec}});
        return 0;
    }
    if (!word.empty()) {
        if (contexts.empty()) {
            throw UsageError("--word needs at least one --context sentence");
        }
        const Eigen::VectorXd v = embedder.embed_word(word, contexts);
        nlohmann::json vec = nlohmann::json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            vec.push_back(v(i));
        }
        emit({{"op", "embed"}, {"word", word}, {"vector", vec}});
        return 0;
    }
    const LabeledItems set = load_labeled_items(items, std::filesystem::path(items).stem().string());
    EmbeddingMatrix matrix;
    matrix.source = std::filesystem::path(ckpt).filename().string();
    matrix.vectors.resize(static_cast<Eigen::Index>(set.items.size()),
                          static_cast<Eigen::Index>(embedder.config().hidden_dim));
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        matrix.item_keys.push_back("s" + std::to_string(i));
        matrix.vectors.row(static_cast<Eigen::Index>(i)) =
            embedder.embed_sentence(set.items[i]).transpose();
    }
    const std::filesystem::path out =
        output.empty() ? cfg.output_dir / "vectors.txt" : std::filesystem::path(output);
    std::filesystem::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    export_vectors(matrix, out);
    emit({{"op", "embed"}, {"items", set.items.size()}, {"output", out.generic_string()}});
    std::cerr << set.items.size() << " vectors into " << out.string() << "\n";
    finish_manifest(cfg, {out});
    return 0;
}

int cmd_eval_intrinsic(const Cli& cli, std::string ckpt, std::string vocab_path,
                       const std::vector<std::string>& set_paths, std::string model_id) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path ckpt_at =
        !ckpt.empty() ? std::filesystem::path(ckpt) : cfg.checkpoint_file;
    const Checkpoint checkpoint = load_checkpoint_at(ckpt_at);
    const Embedder embedder(checkpoint,
                            load_vocab_at(!vocab_path.empty() ? std::filesystem::path(vocab_path)
                                                              : cfg.vocab_file));
    std::vector<std::filesystem::path> paths(set_paths.begin(), set_paths.end());
    if (paths.empty()) {
        paths = cfg.intrinsic_sets;
    }
    const std::vector<LabeledItems> sets = load_sets(paths);
    const std::string id = !model_id.empty() ? model_id : ckpt_at.stem().string();
    const IntrinsicReport report = intrinsic_eval(embedder, sets, cfg.seed, id);
    emit(intrinsic_to_json(report));
    std::cerr << render_intrinsic_table({&report, 1});
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path out = cfg.output_dir / "report_intrinsic.json";
    std::ofstream f(out, std::ios::binary);
    f << intrinsic_to_json(report).dump(2) << "\n";
    if (!f) {
        throw DataError("cannot write " + out.string());
    }
    f.close();
    finish_manifest(cfg, {out});
    return 0;
}

int cmd_eval_extrinsic(const Cli& cli, std::string ckpt, std::string vocab_path,
                       std::string train_path, std::string test_path, std::string model_id,
                       double probe_lr, std::uint64_t probe_epochs) {
    const RunConfig cfg = cli.load();
    const std::filesystem::path ckpt_at =
        !ckpt.empty() ? std::filesystem::path(ckpt) : cfg.checkpoint_file;
    const Checkpoint checkpoint = load_checkpoint_at(ckpt_at);
    const Embedder embedder(checkpoint,
                            load_vocab_at(!vocab_path.empty() ? std::filesystem::path(vocab_path)
                                                              : cfg.vocab_file));
    const std::filesystem::path train_at =
        !train_path.empty() ? std::filesystem::path(train_path) : cfg.classification_train;
    const std::filesystem::path test_at =
        !test_path.empty() ? std::filesystem::path(test_path) : cfg.classification_test;
    if (train_at.empty() || test_at.empty()) {
        throw UsageError("classification needs --train and --test (or config paths)");
    }
    const LabeledItems train = load_labeled_items(train_at, "train");
    const LabeledItems test = load_labeled_items(test_at, "test");
    TrainSpec probe = cfg.train;
    probe.learning_rate = probe_lr;
    probe.epochs = probe_epochs;
    const std::string id = !model_id.empty() ? model_id : ckpt_at.stem().string();
    const ExtrinsicReport report = extrinsic_eval(embedder, train, test, probe, id);
    emit(extrinsic_to_json(report));
    std::cerr << render_extrinsic_table({&report, 1});
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path out = cfg.output_dir / "report_extrinsic.json";
    std::ofstream f(out, std::ios::binary);
    f << extrinsic_to_json(report).dump(2) << "\n";
    if (!f) {
        throw DataError("cannot write " + out.string());
    }
    f.close();
    finish_manifest(cfg, {out});
    return 0;
}

int cmd_compare(const Cli& cli, std::string baseline, std::string candidate, std::string oracle,
                std::string vocab_path, const std::vector<std::string>& set_paths,
                std::string train_path, std::string test_path, double probe_lr,
                std::uint64_t probe_epochs) {
    const RunConfig cfg = cli.load();
    const Vocab vocab = load_vocab_at(!vocab_path.empty() ? std::filesystem::path(vocab_path)
                                                          : cfg.vocab_file);
    std::vector<std::filesystem::path> paths(set_paths.begin(), set_paths.end());
    if (paths.empty()) {
        paths = cfg.intrinsic_sets;
    }
    const std::vector<LabeledItems> sets = load_sets(paths);
    const std::filesystem::path train_at =
        !train_path.empty() ? std::filesystem::path(train_path) : cfg.classification_train;
    const std::filesystem::path test_at =
        !test_path.empty() ? std::filesystem::path(test_path) : cfg.classification_test;
    if (train_at.empty() || test_at.empty()) {
        throw UsageError("classification needs --train and --test (or config paths)");
    }
    const LabeledItems train = load_labeled_items(train_at, "train");
    const LabeledItems test = load_labeled_items(test_at, "test");

    const std::vector<ModelBundle> bundles{
        {"baseline", load_checkpoint(baseline), vocab},
        {"candidate", load_checkpoint(candidate), vocab},
        {"oracle", load_checkpoint(oracle), vocab}};
    TrainSpec probe = cfg.train;
    probe.learning_rate = probe_lr;
    probe.epochs = probe_epochs;
    const ComparisonReport report =
        compare_models(bundles, sets, train, test, probe, cfg.seed);

    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path json_path = cfg.output_dir / "report_comparison.json";
    std::ofstream jf(json_path, std::ios::binary);
    jf << comparison_to_json(report).dump(2) << "\n";
    if (!jf) {
        throw DataError("cannot write " + json_path.string());
    }
    jf.close();
    const std::filesystem::path text_path = cfg.output_dir / "report_comparison.txt";
    std::ofstream tf(text_path, std::ios::binary);
    tf << render_comparison(report);
    if (!tf) {
        throw DataError("cannot write " + text_path.string());
    }
    tf.close();
    emit({{"op", "compare"},
          {"candidate_average_purity", report.intrinsic[1].average},
          {"candidate_f1", report.extrinsic[1].f1}});
    std::cerr << render_comparison(report);
    finish_manifest(cfg, {json_path, text_path});
    return 0;
}

int cmd_all(const Cli& cli) {
    const RunConfig cfg = cli.load();
    run_all(cfg, std::cout, std::cerr);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nepali contextual embedding pipeline"};
    app.require_subcommand(1);

    Cli cli;
    app.add_option("--config", cli.config_path, "run configuration document (JSON)");
    app.add_option("--seed", cli.seed, "override the config seed");
    app.add_option("--preset", cli.preset, "model preset override")
        ->check(CLI::IsMember({"small", "oracle"}));
    app.add_option("--epochs", cli.epochs, "override the fine-tuning epoch count");

    std::vector<std::string> sources;
    std::string output;
    auto* ingest = app.add_subcommand("ingest", "read raw text into a corpus");
    ingest->add_option("--source", sources, "file or directory of newline-delimited text");
    ingest->add_option("--output", output, "corpus directory to write");

    std::string input;
    auto* preprocess = app.add_subcommand("preprocess", "filter, standardize, and split");
    preprocess->add_option("--input", input, "corpus directory to read");
    preprocess->add_option("--output", output, "corpus directory to write");

    auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
    stats->add_option("--input", input, "corpus directory to read");

    std::uint64_t vocab_target = 0;
    auto* train_vocab = app.add_subcommand("train-vocab", "train the subword vocabulary");
    train_vocab->add_option("--input", input, "corpus directory to read");
    train_vocab->add_option("--output", output, "vocabulary file to write");
    train_vocab->add_option("--size", vocab_target, "vocabulary size cap");

    std::string vocab_path, ckpt_in, ckpt_out;
    auto* finetune_cmd = app.add_subcommand("finetune", "masked-token fine-tuning");
    finetune_cmd->add_option("--corpus", input, "corpus directory to read");
    finetune_cmd->add_option("--vocab", vocab_path, "vocabulary file");
    finetune_cmd->add_option("--checkpoint-in", ckpt_in, "checkpoint to resume (default: fresh)");
    finetune_cmd->add_option("--checkpoint-out", ckpt_out, "checkpoint file to write");

    std::string ckpt, text, word, items;
    std::vector<std::string> contexts;
    auto* embed = app.add_subcommand("embed", "produce embedding vectors");
    embed->add_option("--checkpoint", ckpt, "checkpoint file");
    embed->add_option("--vocab", vocab_path, "vocabulary file");
    embed->add_option("--text", text, "one sentence to embed");
    embed->add_option("--word", word, "word to embed across --context sentences");
    embed->add_option("--context", contexts, "context sentence for --word");
    embed->add_option("--items", items, "labeled item file to embed row by row");
    embed->add_option("--output", output, "vector file to write for --items");

    std::vector<std::string> set_paths;
    std::string model_id;
    auto* eval_intrinsic = app.add_subcommand("eval-intrinsic", "clustering purity per set");
    eval_intrinsic->add_option("--checkpoint", ckpt, "checkpoint file");
    eval_intrinsic->add_option("--vocab", vocab_path, "vocabulary file");
    eval_intrinsic->add_option("--set", set_paths, "labeled set file (repeatable)");
    eval_intrinsic->add_option("--model-id", model_id, "row label in the report");

    std::string train_path, test_path;
    double probe_lr = 0.1;
    std::uint64_t probe_epochs = 60;
    auto* eval_extrinsic = app.add_subcommand("eval-extrinsic", "classification probe metrics");
    eval_extrinsic->add_option("--checkpoint", ckpt, "checkpoint file");
    eval_extrinsic->add_option("--vocab", vocab_path, "vocabulary file");
    eval_extrinsic->add_option("--train", train_path, "labeled training file");
    eval_extrinsic->add_option("--test", test_path, "labeled test file");
    eval_extrinsic->add_option("--model-id", model_id, "row label in the report");
    eval_extrinsic->add_option("--probe-lr", probe_lr, "probe learning rate");
    eval_extrinsic->add_option("--probe-epochs", probe_epochs, "probe epoch count");

    std::string baseline, candidate, oracle;
    auto* compare = app.add_subcommand("compare", "three-model evaluation report");
    compare->add_option("--baseline", baseline, "baseline checkpoint")->required();
    compare->add_option("--candidate", candidate, "candidate checkpoint")->required();
    compare->add_option("--oracle", oracle, "oracle checkpoint")->required();
    compare->add_option("--vocab", vocab_path, "vocabulary file shared by all three");
    compare->add_option("--set", set_paths, "labeled set file (repeatable)");
    compare->add_option("--train", train_path, "labeled training file");
    compare->add_option("--test", test_path, "labeled test file");
    compare->add_option("--probe-lr", probe_lr, "probe learning rate");
    compare->add_option("--probe-epochs", probe_epochs, "probe epoch count");

    auto* all = app.add_subcommand("all", "full pipeline: ingest through reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        app.exit(e);
        return 1;
    }
    cli.config_given = app.count("--config") > 0;
    cli.seed_given = app.count("--seed") > 0;
    cli.epochs_given = app.count("--epochs") > 0;

    try {
        if (ingest->parsed()) {
            return cmd_ingest(cli, sources, output);
        }
        if (preprocess->parsed()) {
            return cmd_preprocess(cli, input, output);
        }
        if (stats->parsed()) {
            return cmd_stats(cli, input);
        }
        if (train_vocab->parsed()) {
            return cmd_train_vocab(cli, input, output, vocab_target);
        }
        if (finetune_cmd->parsed()) {
            return cmd_finetune(cli, input, vocab_path, ckpt_in, ckpt_out);
        }
        if (embed->parsed()) {
            return cmd_embed(cli, ckpt, vocab_path, text, word, contexts, items, output);
        }
        if (eval_intrinsic->parsed()) {
            return cmd_eval_intrinsic(cli, ckpt, vocab_path, set_paths, model_id);
        }
        if (eval_extrinsic->parsed()) {
            return cmd_eval_extrinsic(cli, ckpt, vocab_path, train_path, test_path, model_id,
                                      probe_lr, probe_epochs);
        }
        if (compare->parsed()) {
            return cmd_compare(cli, baseline, candidate, oracle, vocab_path, set_paths,
                               train_path, test_path, probe_lr, probe_epochs);
        }
        if (all->parsed()) {
            return cmd_all(cli);
        }
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
