#include "nepembed/pipeline.hpp"

#include <fstream>
#include <ostream>
#include <vector>

#include <openssl/evp.h>

#include "nepembed/errors.hpp"
#include "nepembed/evaluation.hpp"
#include "nepembed/preprocess.hpp"
#include "nepembed/rng.hpp"

namespace nepembed {

namespace {

constexpr std::uint64_t kOracleStream = 0x6f7261636c653031ULL;
constexpr double kProbeLearningRate = 0.1;
constexpr std::size_t kProbeEpochs = 60;

std::string to_hex(const unsigned char* digest, unsigned int len) {
    static const char* kDigits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kDigits[digest[i] >> 4]);
        out.push_back(kDigits[digest[i] & 0xf]);
    }
    return out;
}

} // namespace

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        throw NumericError("sha256 failed");
    }
    return to_hex(digest, digest_len);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericError("sha256 failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got <= 0) {
            break;
        }
        if (EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got)) != 1) {
            EVP_MD_CTX_free(ctx);
            throw NumericError("sha256 failed");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    const int ok = EVP_DigestFinal_ex(ctx, digest, &digest_len);
    EVP_MD_CTX_free(ctx);
    if (ok != 1) {
        throw NumericError("sha256 failed");
    }
    return to_hex(digest, digest_len);
}

Manifest::Manifest(std::filesystem::path root) : root_(std::move(root)) {}

void Manifest::record(const std::filesystem::path& file) {
    const std::filesystem::path rel =
        std::filesystem::relative(std::filesystem::weakly_canonical(file),
                                  std::filesystem::weakly_canonical(root_));
    if (rel.empty() || rel.native().starts_with("..")) {
        throw DataError("artifact " + file.string() + " escapes the output dir");
    }
    files_[rel.generic_string()] = sha256_file(file);
}

void Manifest::write() const {
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [rel, digest] : files_) {
        files[rel] = digest;
    }
    const std::filesystem::path path = root_ / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << nlohmann::json{{"files", files}}.dump(2) << "\n";
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

namespace {

void emit(std::ostream& ndjson, const nlohmann::json& record) {
    ndjson << record.dump() << "\n";
}

SourceCategory category_for_dir(const std::filesystem::path& dir) {
    // Naming convention: a source whose basename mentions "unregulated" holds
    // unedited text; everything else counts as editorially reviewed.
    const std::string name = dir.filename().string();
    return name.find("unregulated") != std::string::npos ? SourceCategory::Unregulated
                                                         : SourceCategory::Regulated;
}

void write_text_artifact(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

void write_json_artifact(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text_artifact(path, doc.dump(2) + "\n");
}

} // namespace

PipelineOutcome run_all(const RunConfig& config, std::ostream& ndjson, std::ostream& human) {
    std::filesystem::create_directories(config.output_dir);
    Manifest manifest(config.output_dir);

    // Ingest.
    Corpus raw;
    std::uint64_t rejects = 0;
    for (const auto& dir : config.corpus_dirs) {
        const IngestResult r = raw.ingest(dir, category_for_dir(dir));
        rejects += r.rejects;
    }
    emit(ndjson, {{"stage", "ingest"}, {"documents", raw.size()}, {"rejects", rejects}});
    human << "ingested " << raw.size() << " documents (" << rejects << " rejected lines)\n";

    // Filter, standardize, split.
    const HindiLexicon lexicon = config.hindi_lexicon.empty()
                                     ? HindiLexicon{}
                                     : HindiLexicon::load(config.hindi_lexicon);
    const NormalizationMap norm_map = config.normalization_map.empty()
                                          ? NormalizationMap{}
                                          : NormalizationMap::load(config.normalization_map);
    const SuffixTable suffixes = config.suffix_table.empty()
                                     ? SuffixTable{}
                                     : SuffixTable::load(config.suffix_table);
    PipelineResult pre = run_pipeline(raw, lexicon, norm_map, suffixes);
    const std::filesystem::path corpus_dir = config.output_dir / "corpus";
    pre.corpus.save(corpus_dir);
    for (const auto& entry : std::filesystem::directory_iterator(corpus_dir)) {
        manifest.record(entry.path());
    }
    emit(ndjson, {{"stage", "preprocess"},
                  {"kept", pre.report.kept},
                  {"dropped", pre.report.dropped}});
    human << "preprocess kept " << pre.report.kept << " of " << pre.report.input_count
          << " documents\n";

    // Corpus statistics.
    const CorpusStats stats = pre.corpus.stats();
    nlohmann::json stats_doc = nlohmann::json::parse(stats_to_json(stats));
    stats_doc["dropped_documents"] = pre.report.dropped;
    const std::filesystem::path stats_path = config.output_dir / "stats.json";
    write_json_artifact(stats_path, stats_doc);
    manifest.record(stats_path);
    emit(ndjson, {{"stage", "stats"},
                  {"word_tokens", stats.word_token_count},
                  {"word_types", stats.word_type_count}});
    human << "corpus: " << stats.word_token_count << " word tokens, " << stats.word_type_count
          << " types\n";

    // Vocabulary.
    Vocab vocab;
    if (!config.vocab_file.empty()) {
        vocab = Vocab::load(config.vocab_file);
    } else {
        if (pre.corpus.empty()) {
            throw DataError("cannot train a vocabulary on an empty corpus");
        }
        vocab = Vocab::train(pre.corpus, config.model.vocab_size);
    }
    const std::filesystem::path vocab_path = config.output_dir / "vocab.txt";
    vocab.save(vocab_path);
    manifest.record(vocab_path);
    emit(ndjson, {{"stage", "vocab"}, {"size", vocab.size()}});
    human << "vocabulary: " << vocab.size() << " tokens\n";

    // Baseline checkpoint: loaded when configured, freshly initialized
    // otherwise. The model always matches the actual vocabulary.
    ModelConfig model_cfg = config.model;
    model_cfg.vocab_size = vocab.size();
    Checkpoint baseline;
    if (!config.checkpoint_file.empty()) {
        baseline = load_checkpoint(config.checkpoint_file);
        if (baseline.config.vocab_size != vocab.size()) {
            throw DataError("checkpoint vocabulary size " +
                            std::to_string(baseline.config.vocab_size) +
                            " does not match the vocabulary (" + std::to_string(vocab.size()) +
                            ")");
        }
    } else {
        baseline = init_checkpoint(model_cfg, config.seed);
    }
    const std::filesystem::path baseline_path = config.output_dir / "checkpoint_baseline.nepc";
    save_checkpoint(baseline, baseline_path);
    manifest.record(baseline_path);

    // Fine-tune; every 5th sequence is held out for perplexity.
    const std::vector<Encoded> all_seqs = encode_corpus(pre.corpus, vocab, model_cfg.max_len);
    std::vector<Encoded> train_seqs;
    std::vector<Encoded> heldout;
    for (std::size_t i = 0; i < all_seqs.size(); ++i) {
        (i % 5 == 4 ? heldout : train_seqs).push_back(all_seqs[i]);
    }
    if (heldout.empty()) {
        heldout = train_seqs;
    }
    TrainSpec spec = config.train;
    FinetuneOptions opts;
    opts.log = &ndjson;
    opts.heldout = &heldout;
    const Checkpoint candidate = finetune(baseline, train_seqs, spec, opts);
    const std::filesystem::path candidate_path = config.output_dir / "checkpoint_candidate.nepc";
    save_checkpoint(candidate, candidate_path);
    manifest.record(candidate_path);
    human << "fine-tuned " << spec.epochs << " epochs over " << train_seqs.size()
          << " sequences\n";

    // Upper-bound stand-in: the candidate trained through a second schedule.
    TrainSpec oracle_spec = spec;
    oracle_spec.seed = Rng::mix(config.seed, kOracleStream);
    const Checkpoint oracle = finetune(candidate, train_seqs, oracle_spec, opts);
    const std::filesystem::path oracle_path = config.output_dir / "checkpoint_oracle.nepc";
    save_checkpoint(oracle, oracle_path);
    manifest.record(oracle_path);

    // Held-out perplexity of all three.
    nlohmann::json ppl;
    ppl["baseline"] = perplexity(baseline, heldout, spec.mask_prob, config.seed);
    ppl["candidate"] = perplexity(candidate, heldout, spec.mask_prob, config.seed);
    ppl["oracle"] = perplexity(oracle, heldout, spec.mask_prob, config.seed);
    const std::filesystem::path ppl_path = config.output_dir / "perplexity.json";
    write_json_artifact(ppl_path, ppl);
    manifest.record(ppl_path);
    emit(ndjson, {{"stage", "perplexity"},
                  {"baseline", ppl["baseline"]},
                  {"candidate", ppl["candidate"]},
                  {"oracle", ppl["oracle"]}});
    human << "held-out perplexity: baseline " << ppl["baseline"] << ", candidate "
          << ppl["candidate"] << ", oracle " << ppl["oracle"] << "\n";

    // Evaluation reports.
    std::vector<LabeledItems> intrinsic_sets;
    for (std::size_t i = 0; i < config.intrinsic_sets.size(); ++i) {
        intrinsic_sets.push_back(load_labeled_items(
            config.intrinsic_sets[i], config.intrinsic_sets[i].stem().string()));
    }
    const bool have_classification =
        !config.classification_train.empty() && !config.classification_test.empty();
    if (!intrinsic_sets.empty() && have_classification) {
        const LabeledItems cls_train =
            load_labeled_items(config.classification_train, "train");
        const LabeledItems cls_test = load_labeled_items(config.classification_test, "test");
        const std::vector<ModelBundle> bundles{{"baseline", baseline, vocab},
                                               {"candidate", candidate, vocab},
                                               {"oracle", oracle, vocab}};
        TrainSpec probe_spec = spec;
        probe_spec.learning_rate = kProbeLearningRate;
        probe_spec.epochs = kProbeEpochs;
        const ComparisonReport report = compare_models(bundles, intrinsic_sets, cls_train,
                                                       cls_test, probe_spec, config.seed);
        const std::filesystem::path json_path = config.output_dir / "report_comparison.json";
        write_json_artifact(json_path, comparison_to_json(report));
        manifest.record(json_path);
        const std::filesystem::path text_path = config.output_dir / "report_comparison.txt";
        write_text_artifact(text_path, render_comparison(report));
        manifest.record(text_path);
        emit(ndjson, {{"stage", "compare"},
                      {"candidate_average_purity", report.intrinsic[1].average},
                      {"candidate_f1", report.extrinsic[1].f1}});
        human << render_comparison(report);
    } else if (!intrinsic_sets.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        const std::vector<std::pair<std::string, const Checkpoint*>> named{
            {"baseline", &baseline}, {"candidate", &candidate}, {"oracle", &oracle}};
        for (const auto& [id, ckpt] : named) {
            const Embedder embedder(*ckpt, vocab);
            rows.push_back(
                intrinsic_to_json(intrinsic_eval(embedder, intrinsic_sets, config.seed, id)));
        }
        const std::filesystem::path path = config.output_dir / "report_intrinsic.json";
        write_json_artifact(path, {{"rows", rows}});
        manifest.record(path);
        human << "intrinsic report written (no classification sets configured)\n";
    }

    // Candidate sentence vectors for the first labeled set, plus their 2-D
    // projection with cluster assignments.
    if (!intrinsic_sets.empty()) {
        const Embedder embedder(candidate, vocab);
        const LabeledItems& first = intrinsic_sets.front();
        EmbeddingMatrix matrix;
        matrix.source = "candidate";
        matrix.vectors.resize(static_cast<Eigen::Index>(first.items.size()),
                              static_cast<Eigen::Index>(embedder.config().hidden_dim));
        for (std::size_t i = 0; i < first.items.size(); ++i) {
            matrix.item_keys.push_back("s" + std::to_string(i));
            matrix.vectors.row(static_cast<Eigen::Index>(i)) =
                embedder.embed_sentence(first.items[i]).transpose();
        }
        const std::filesystem::path vec_path = config.output_dir / "vectors.txt";
        export_vectors(matrix, vec_path);
        manifest.record(vec_path);
        if (first.items.size() >= 3 && embedder.config().hidden_dim >= 2) {
            const Projection2D proj = project_2d(matrix.vectors, config.seed);
            const KmeansResult km =
                kmeans(matrix.vectors, first.n_categories(), Rng::mix(config.seed, 0));
            const std::filesystem::path proj_path = config.output_dir / "projection.txt";
            export_projection(proj_path, matrix.item_keys, proj.coords, km.assignments,
                              first.labels);
            manifest.record(proj_path);
        }
        emit(ndjson, {{"stage", "vectors"}, {"items", first.items.size()}});
    }

    // Provenance: the fully resolved config, then the manifest over
    // everything above.
    write_config_echo(config);
    manifest.record(config.output_dir / "config.json");
    manifest.write();
    emit(ndjson, {{"stage", "manifest"}, {"files", manifest.files().size()}});
    human << "manifest covers " << manifest.files().size() << " artifacts under "
          << config.output_dir.string() << "\n";

    PipelineOutcome outcome;
    outcome.artifacts = manifest.files();
    return outcome;
}

} // namespace nepembed
