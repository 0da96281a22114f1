#include "nepembed/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "nepembed/errors.hpp"
#include "nepembed/utf8.hpp"

namespace nepembed {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SourceCategory c) {
    return c == SourceCategory::Regulated ? "regulated" : "unregulated";
}

std::string_view to_string(IngestStage s) {
    switch (s) {
    case IngestStage::Raw: return "raw";
    case IngestStage::Filtered: return "filtered";
    case IngestStage::Standardized: return "standardized";
    case IngestStage::Lexed: return "lexed";
    }
    return "raw";
}

SourceCategory source_category_from_string(std::string_view s) {
    if (s == "regulated") return SourceCategory::Regulated;
    if (s == "unregulated") return SourceCategory::Unregulated;
    throw DataError("unknown source category: " + std::string(s));
}

IngestStage ingest_stage_from_string(std::string_view s) {
    if (s == "raw") return IngestStage::Raw;
    if (s == "filtered") return IngestStage::Filtered;
    if (s == "standardized") return IngestStage::Standardized;
    if (s == "lexed") return IngestStage::Lexed;
    throw DataError("unknown ingest stage: " + std::string(s));
}

std::string stats_to_json(const CorpusStats& stats) {
    json j;
    j["word_token_count"] = stats.word_token_count;
    j["word_type_count"] = stats.word_type_count;
    j["document_count"] = stats.document_count;
    return j.dump();
}

const Document* Corpus::find(std::string_view id) const {
    for (const auto& d : docs_) {
        if (d.id == id) {
            return &d;
        }
    }
    return nullptr;
}

void Corpus::add(Document doc) {
    if (find(doc.id) != nullptr) {
        throw DataError("duplicate document id: " + doc.id);
    }
    docs_.push_back(std::move(doc));
}

IngestResult Corpus::ingest_file(const fs::path& file, SourceCategory category) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + file.string());
    }
    IngestResult result;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const bool blank = std::all_of(line.begin(), line.end(), text::is_space);
        if (blank) {
            continue;
        }
        if (!utf8::is_valid(line)) {
            ++result.rejects;
            continue;
        }
        Document doc;
        doc.id = file.string() + ":" + std::to_string(line_no);
        doc.text = line;
        doc.source_category = category;
        doc.origin = file.string();
        doc.stage = IngestStage::Raw;
        result.ids.push_back(doc.id);
        add(std::move(doc));
    }
    return result;
}

IngestResult Corpus::ingest(const fs::path& path, SourceCategory category) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        IngestResult result;
        for (const auto& f : files) {
            IngestResult one = ingest_file(f, category);
            result.rejects += one.rejects;
            result.ids.insert(result.ids.end(), one.ids.begin(), one.ids.end());
        }
        return result;
    }
    if (!fs::exists(path, ec)) {
        throw DataError("no such path: " + path.string());
    }
    return ingest_file(path, category);
}

void Corpus::advance_stage(std::string_view id, IngestStage new_stage, std::string new_text) {
    for (auto& d : docs_) {
        if (d.id == id) {
            if (static_cast<int>(new_stage) < static_cast<int>(d.stage)) {
                throw DataError("stage may not move backward for document " + d.id);
            }
            if (!utf8::is_valid(new_text)) {
                throw DataError("replacement text is not valid UTF-8 for document " + d.id);
            }
            d.stage = new_stage;
            d.text = std::move(new_text);
            return;
        }
    }
    throw DataError("unknown document id: " + std::string(id));
}

CorpusStats Corpus::stats() const {
    CorpusStats s;
    s.document_count = docs_.size();
    std::unordered_set<std::string_view> types;
    for (const auto& d : docs_) {
        for (auto tok : text::split_whitespace(d.text)) {
            ++s.word_token_count;
            types.insert(tok);
        }
    }
    s.word_type_count = types.size();
    return s;
}

Corpus Corpus::merge(const Corpus& a, const Corpus& b) {
    std::unordered_set<std::string_view> seen;
    for (const auto& d : a.docs_) {
        seen.insert(d.id);
    }
    for (const auto& d : b.docs_) {
        if (seen.contains(d.id)) {
            throw DataError("id collision on merge: " + d.id);
        }
    }
    Corpus merged;
    merged.docs_ = a.docs_;
    merged.docs_.insert(merged.docs_.end(), b.docs_.begin(), b.docs_.end());
    return merged;
}

namespace {

constexpr const char* kStageFiles[] = {"raw.txt", "filtered.txt", "standardized.txt", "lexed.txt"};

} // namespace

void Corpus::save(const fs::path& dir) const {
    fs::create_directories(dir);
    json meta = json::array();
    for (const auto& d : docs_) {
        if (d.text.find('\n') != std::string::npos) {
            throw DataError("document text contains a newline, cannot persist: " + d.id);
        }
        meta.push_back({{"id", d.id},
                        {"category", std::string(to_string(d.source_category))},
                        {"origin", d.origin},
                        {"stage", std::string(to_string(d.stage))}});
    }
    {
        std::ofstream out(dir / "meta.json", std::ios::binary);
        if (!out) {
            throw DataError("cannot write " + (dir / "meta.json").string());
        }
        out << meta.dump(2) << "\n";
    }
    for (int stage = 0; stage < 4; ++stage) {
        std::ofstream out(dir / kStageFiles[stage], std::ios::binary);
        if (!out) {
            throw DataError("cannot write " + (dir / kStageFiles[stage]).string());
        }
        for (const auto& d : docs_) {
            if (static_cast<int>(d.stage) == stage) {
                out << d.text << "\n";
            }
        }
    }
}

Corpus Corpus::load(const fs::path& dir) {
    std::ifstream meta_in(dir / "meta.json", std::ios::binary);
    if (!meta_in) {
        throw DataError("cannot read " + (dir / "meta.json").string());
    }
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw DataError("malformed corpus metadata: " + std::string(e.what()));
    }
    if (!meta.is_array()) {
        throw DataError("malformed corpus metadata: expected an array");
    }

    Corpus corpus;
    for (const auto& entry : meta) {
        Document d;
        d.id = entry.at("id").get<std::string>();
        d.source_category = source_category_from_string(entry.at("category").get<std::string>());
        d.origin = entry.at("origin").get<std::string>();
        d.stage = ingest_stage_from_string(entry.at("stage").get<std::string>());
        corpus.add(std::move(d));
    }

    for (int stage = 0; stage < 4; ++stage) {
        std::ifstream in(dir / kStageFiles[stage], std::ios::binary);
        if (!in) {
            continue; // stage file may be absent in hand-built layouts
        }
        std::vector<Document*> at_stage;
        for (auto& d : corpus.docs_) {
            if (static_cast<int>(d.stage) == stage) {
                at_stage.push_back(&d);
            }
        }
        std::string line;
        std::size_t i = 0;
        while (std::getline(in, line)) {
            if (i >= at_stage.size()) {
                throw DataError("corpus stage file has more lines than metadata entries: " +
                                std::string(kStageFiles[stage]));
            }
            if (!utf8::is_valid(line)) {
                throw DataError("invalid UTF-8 in stored corpus: " + std::string(kStageFiles[stage]));
            }
            at_stage[i]->text = line;
            ++i;
        }
        if (i != at_stage.size()) {
            throw DataError("corpus stage file is missing lines: " + std::string(kStageFiles[stage]));
        }
    }
    return corpus;
}

} // namespace nepembed
