#include "nepembed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "nepembed/errors.hpp"
#include "nepembed/rng.hpp"
#include "nepembed/utf8.hpp"

namespace nepembed {

namespace {

constexpr std::size_t kRestarts = 10;
constexpr std::size_t kMaxLloyd = 300;
constexpr std::uint64_t kProbeShuffleStream = 0x70726f6265736866ULL;

std::size_t nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

double assignment_cost(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                       const std::vector<std::size_t>& assign) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        cost += (points.row(i) -
                 centroids.row(static_cast<Eigen::Index>(assign[static_cast<std::size_t>(i)])))
                    .squaredNorm();
    }
    return cost;
}

} // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(points.rows());
    if (k == 0) {
        throw UsageError("k must be at least 1");
    }
    if (k > n) {
        throw UsageError("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                         " points");
    }

    KmeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < kRestarts; ++restart) {
        Rng rng(Rng::mix(seed, restart));

        // k-means++ seeding: next centroid drawn proportionally to the
        // squared distance from the chosen set.
        Eigen::MatrixXd cent(static_cast<Eigen::Index>(k), points.cols());
        cent.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
        std::vector<double> d2(n, std::numeric_limits<double>::infinity());
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = (points.row(static_cast<Eigen::Index>(i)) -
                                  cent.row(static_cast<Eigen::Index>(c - 1)))
                                     .squaredNorm();
                d2[i] = std::min(d2[i], d);
                total += d2[i];
            }
            std::size_t pick = n - 1;
            if (total > 0.0) {
                const double u = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = rng.below(n);  // all remaining distances zero
            }
            cent.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
        }

        // Lloyd iterations to an assignment fixpoint. An emptied cluster
        // keeps its previous centroid.
        std::vector<std::size_t> assign(n, std::numeric_limits<std::size_t>::max());
        std::vector<double> history;
        for (std::size_t iter = 0; iter < kMaxLloyd; ++iter) {
            std::vector<std::size_t> next(n);
            for (std::size_t i = 0; i < n; ++i) {
                next[i] = nearest_centroid(cent, points.row(static_cast<Eigen::Index>(i)));
            }
            const bool fixed = next == assign;
            assign = std::move(next);

            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                         points.cols());
            std::vector<std::size_t> counts(k, 0);
            for (std::size_t i = 0; i < n; ++i) {
                sums.row(static_cast<Eigen::Index>(assign[i])) +=
                    points.row(static_cast<Eigen::Index>(i));
                counts[assign[i]] += 1;
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] > 0) {
                    cent.row(static_cast<Eigen::Index>(c)) =
                        sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
                }
            }
            history.push_back(assignment_cost(points, cent, assign));
            if (fixed) {
                break;
            }
        }

        if (history.back() < best.wcss) {
            best.assignments = assign;
            best.centroids = cent;
            best.wcss = history.back();
            best.wcss_history = std::move(history);
        }
    }
    return best;
}

double purity(std::span<const std::size_t> assignments, std::span<const std::string> gold) {
    if (assignments.size() != gold.size()) {
        throw DataError("assignments and gold labels differ in length");
    }
    if (assignments.empty()) {
        throw DataError("purity of an empty assignment is undefined");
    }
    std::map<std::size_t, std::map<std::string, std::size_t>> overlap;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        overlap[assignments[i]][gold[i]] += 1;
    }
    std::size_t dominant = 0;
    for (const auto& [cluster, counts] : overlap) {
        std::size_t mx = 0;
        for (const auto& [label, count] : counts) {
            mx = std::max(mx, count);
        }
        dominant += mx;
    }
    return static_cast<double>(dominant) / static_cast<double>(assignments.size());
}

std::size_t LabeledItems::n_categories() const {
    return std::set<std::string>(labels.begin(), labels.end()).size();
}

void LabeledItems::validate(std::size_t min_categories) const {
    if (items.size() != labels.size()) {
        throw DataError("set " + set_name + ": items and labels differ in length");
    }
    if (items.empty()) {
        throw DataError("set " + set_name + " is empty");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].empty() || labels[i].empty()) {
            throw DataError("set " + set_name + ": blank item or label at row " +
                            std::to_string(i));
        }
    }
    if (n_categories() < min_categories) {
        throw DataError("set " + set_name + " has " + std::to_string(n_categories()) +
                        " categories, needs at least " + std::to_string(min_categories));
    }
}

LabeledItems load_labeled_items(const std::filesystem::path& path, std::string set_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    LabeledItems out;
    out.set_name = std::move(set_name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!utf8::is_valid(line)) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": invalid UTF-8");
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected item<TAB>category");
        }
        out.items.push_back(line.substr(0, tab));
        out.labels.push_back(line.substr(tab + 1));
    }
    out.validate(1);
    return out;
}

void LabeledVectorSet::validate(std::size_t min_categories) const {
    vectors.validate();
    if (static_cast<std::size_t>(vectors.vectors.rows()) != gold_labels.size()) {
        throw DataError("set " + set_name + ": vectors and labels differ in length");
    }
    if (gold_labels.empty()) {
        throw DataError("set " + set_name + " is empty");
    }
    const std::set<std::string> distinct(gold_labels.begin(), gold_labels.end());
    if (distinct.size() != n_categories) {
        throw DataError("set " + set_name + ": n_categories does not match the labels");
    }
    if (n_categories < min_categories) {
        throw DataError("set " + set_name + " has " + std::to_string(n_categories) +
                        " categories, needs at least " + std::to_string(min_categories));
    }
}

LabeledVectorSet embed_items(const Embedder& embedder, const LabeledItems& items) {
    items.validate(1);
    LabeledVectorSet out;
    out.set_name = items.set_name;
    out.gold_labels = items.labels;
    out.n_categories = items.n_categories();
    out.vectors.item_keys = items.items;
    out.vectors.source = "mean-pooled sentence embeddings";
    out.vectors.vectors.resize(static_cast<Eigen::Index>(items.items.size()),
                               static_cast<Eigen::Index>(embedder.config().hidden_dim));
    for (std::size_t i = 0; i < items.items.size(); ++i) {
        out.vectors.vectors.row(static_cast<Eigen::Index>(i)) =
            embedder.embed_sentence(items.items[i]).transpose();
    }
    return out;
}

IntrinsicReport intrinsic_eval(const Embedder& embedder, std::span<const LabeledItems> sets,
                               std::uint64_t seed, std::string model_id) {
    if (sets.empty()) {
        throw UsageError("intrinsic evaluation needs at least one labeled set");
    }
    IntrinsicReport report;
    report.model_id = std::move(model_id);
    double total = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const LabeledVectorSet vs = embed_items(embedder, sets[i]);
        const KmeansResult km =
            kmeans(vs.vectors.vectors, vs.n_categories, Rng::mix(seed, i));
        const double p = purity(km.assignments, vs.gold_labels);
        report.per_set_purity.emplace_back(sets[i].set_name, p);
        total += p;
    }
    report.average = total / static_cast<double>(sets.size());
    return report;
}

Projection2D project_2d(const Eigen::MatrixXd& vectors, std::uint64_t /*seed*/) {
    const Eigen::Index n = vectors.rows();
    const Eigen::Index d = vectors.cols();
    if (n < 3) {
        throw UsageError("projection needs at least 3 points");
    }
    if (d < 2) {
        throw UsageError("projection needs at least 2 input dimensions");
    }
    bool distinct = false;
    for (Eigen::Index r = 1; r < n && !distinct; ++r) {
        distinct = (vectors.row(r) - vectors.row(0)).squaredNorm() > 0.0;
    }
    if (!distinct) {
        throw DataError("projection needs at least 2 distinct points");
    }

    Projection2D out;
    out.mean = vectors.colwise().mean();
    const Eigen::MatrixXd centered = vectors.rowwise() - out.mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) {
        throw NumericError("eigendecomposition failed");
    }
    out.eigenvalues = es.eigenvalues().reverse().cwiseMax(0.0);
    out.components.resize(d, 2);
    out.components.col(0) = es.eigenvectors().col(d - 1);
    out.components.col(1) = es.eigenvectors().col(d - 2);
    // Deterministic orientation: the largest-magnitude coordinate of each
    // component points positive.
    for (int c = 0; c < 2; ++c) {
        Eigen::Index arg = 0;
        double mx = std::abs(out.components(0, c));
        for (Eigen::Index r = 1; r < d; ++r) {
            if (std::abs(out.components(r, c)) > mx) {
                mx = std::abs(out.components(r, c));
                arg = r;
            }
        }
        if (out.components(arg, c) < 0.0) {
            out.components.col(c) = -out.components.col(c);
        }
    }
    out.coords = centered * out.components;
    return out;
}

void export_projection(const std::filesystem::path& path, std::span<const std::string> keys,
                       const Eigen::MatrixXd& coords, std::span<const std::size_t> assignments,
                       std::span<const std::string> gold) {
    const std::size_t n = keys.size();
    if (static_cast<std::size_t>(coords.rows()) != n || assignments.size() != n ||
        gold.size() != n || coords.cols() != 2) {
        throw DataError("projection export inputs are misaligned");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        out << keys[i];
        for (Eigen::Index c = 0; c < 2; ++c) {
            std::snprintf(buf, sizeof(buf), "%.9g", coords(static_cast<Eigen::Index>(i), c));
            out << " " << buf;
        }
        out << " " << assignments[i] << " " << gold[i] << "\n";
    }
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

Classifier train_classifier(const LabeledVectorSet& train, const TrainSpec& spec) {
    train.validate(2);
    spec.validate();
    Classifier clf;
    {
        const std::set<std::string> distinct(train.gold_labels.begin(), train.gold_labels.end());
        clf.classes.assign(distinct.begin(), distinct.end());
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < clf.classes.size(); ++c) {
        index[clf.classes[c]] = c;
    }
    const Eigen::Index dim = train.vectors.vectors.cols();
    const auto k = static_cast<Eigen::Index>(clf.classes.size());
    clf.w = Eigen::MatrixXd::Zero(dim, k);
    clf.b = Eigen::MatrixXd::Zero(1, k);

    const std::size_t n = train.gold_labels.size();
    std::vector<std::size_t> target(n);
    for (std::size_t i = 0; i < n; ++i) {
        target[i] = index[train.gold_labels[i]];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        Rng rng(Rng::mix(Rng::mix(spec.seed, kProbeShuffleStream), epoch));
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += spec.batch_size) {
            const std::size_t stop = std::min(n, start + spec.batch_size);
            const auto m = static_cast<Eigen::Index>(stop - start);
            Eigen::MatrixXd xb(m, dim);
            for (std::size_t i = start; i < stop; ++i) {
                xb.row(static_cast<Eigen::Index>(i - start)) =
                    train.vectors.vectors.row(static_cast<Eigen::Index>(order[i]));
            }
            Eigen::MatrixXd logits = (xb * clf.w).rowwise() + clf.b.row(0);
            for (Eigen::Index r = 0; r < m; ++r) {
                const double mx = logits.row(r).maxCoeff();
                const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
                logits.row(r) = (logits.row(r).array() - lse).exp();
            }
            for (Eigen::Index r = 0; r < m; ++r) {
                logits(r, static_cast<Eigen::Index>(target[order[start + static_cast<std::size_t>(r)]])) -=
                    1.0;
            }
            logits /= static_cast<double>(m);
            clf.w -= spec.learning_rate * (xb.transpose() * logits);
            clf.b.row(0).array() -= spec.learning_rate * logits.array().colwise().sum();
        }
    }
    return clf;
}

std::vector<std::string> classify(const Classifier& clf, const Eigen::MatrixXd& vectors) {
    if (vectors.cols() != clf.w.rows()) {
        throw DataError("vector width does not match the classifier");
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(vectors.rows()));
    const Eigen::MatrixXd logits = (vectors * clf.w).rowwise() + clf.b.row(0);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index arg = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(r, c) > logits(r, arg)) {
                arg = c;
            }
        }
        out.push_back(clf.classes[static_cast<std::size_t>(arg)]);
    }
    return out;
}

ExtrinsicReport macro_metrics(std::span<const std::string> predictions,
                              std::span<const std::string> gold) {
    if (predictions.size() != gold.size()) {
        throw DataError("predictions and gold labels differ in length");
    }
    if (predictions.empty()) {
        throw DataError("macro metrics of an empty set are undefined");
    }
    ExtrinsicReport report;
    {
        std::set<std::string> distinct(gold.begin(), gold.end());
        distinct.insert(predictions.begin(), predictions.end());
        report.classes.assign(distinct.begin(), distinct.end());
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        index[report.classes[c]] = c;
    }
    const std::size_t k = report.classes.size();
    report.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        report.confusion[index[gold[i]]][index[predictions[i]]] += 1;
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t row_sum = 0;
        std::size_t col_sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row_sum += report.confusion[c][j];
            col_sum += report.confusion[j][c];
        }
        const auto tp = static_cast<double>(report.confusion[c][c]);
        ClassMetrics cm;
        cm.label = report.classes[c];
        cm.support = row_sum;
        cm.precision = col_sum > 0 ? tp / static_cast<double>(col_sum) : 0.0;
        cm.recall = row_sum > 0 ? tp / static_cast<double>(row_sum) : 0.0;
        cm.f1 = cm.precision + cm.recall > 0.0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        report.precision += cm.precision;
        report.recall += cm.recall;
        report.f1 += cm.f1;
        report.per_class.push_back(std::move(cm));
    }
    report.precision /= static_cast<double>(k);
    report.recall /= static_cast<double>(k);
    report.f1 /= static_cast<double>(k);
    return report;
}

ExtrinsicReport extrinsic_eval(const Embedder& embedder, const LabeledItems& train,
                               const LabeledItems& test, const TrainSpec& spec,
                               std::string model_id) {
    const LabeledVectorSet train_vs = embed_items(embedder, train);
    const LabeledVectorSet test_vs = embed_items(embedder, test);
    const Classifier clf = train_classifier(train_vs, spec);
    const std::vector<std::string> predictions = classify(clf, test_vs.vectors.vectors);
    ExtrinsicReport report = macro_metrics(predictions, test_vs.gold_labels);
    report.epochs = spec.epochs;
    report.model_id = std::move(model_id);
    return report;
}

std::string deviation_annotation(double candidate, double baseline) {
    const long long pp = std::llround((candidate - baseline) * 100.0);
    if (pp > 0) {
        return std::to_string(pp) + "% lead";
    }
    if (pp < 0) {
        return std::to_string(-pp) + "% lag";
    }
    return "even";
}

ComparisonReport compare_models(std::span<const ModelBundle> models,
                                std::span<const LabeledItems> intrinsic_sets,
                                const LabeledItems& train, const LabeledItems& test,
                                const TrainSpec& probe_spec, std::uint64_t seed) {
    if (models.size() != 3) {
        throw UsageError("comparison expects baseline, candidate, and oracle models");
    }
    if (intrinsic_sets.empty()) {
        throw UsageError("comparison needs at least one labeled set");
    }
    ComparisonReport report;
    for (const auto& set : intrinsic_sets) {
        report.set_names.push_back(set.set_name);
    }
    for (const auto& bundle : models) {
        const Embedder embedder(bundle.ckpt, bundle.vocab);
        report.intrinsic.push_back(intrinsic_eval(embedder, intrinsic_sets, seed, bundle.id));
        report.extrinsic.push_back(extrinsic_eval(embedder, train, test, probe_spec, bundle.id));
    }

    const auto winner = [&](auto&& value_of) {
        std::size_t arg = 0;
        for (std::size_t m = 1; m < models.size(); ++m) {
            if (value_of(m) > value_of(arg)) {
                arg = m;
            }
        }
        return models[arg].id;
    };
    for (std::size_t col = 0; col < report.set_names.size(); ++col) {
        report.intrinsic_winners.push_back(
            winner([&](std::size_t m) { return report.intrinsic[m].per_set_purity[col].second; }));
    }
    report.intrinsic_winners.push_back(
        winner([&](std::size_t m) { return report.intrinsic[m].average; }));
    report.extrinsic_winners.push_back(
        winner([&](std::size_t m) { return report.extrinsic[m].precision; }));
    report.extrinsic_winners.push_back(
        winner([&](std::size_t m) { return report.extrinsic[m].recall; }));
    report.extrinsic_winners.push_back(
        winner([&](std::size_t m) { return report.extrinsic[m].f1; }));

    for (std::size_t col = 0; col < report.set_names.size(); ++col) {
        report.deviations.emplace_back(
            report.set_names[col],
            deviation_annotation(report.intrinsic[1].per_set_purity[col].second,
                                 report.intrinsic[0].per_set_purity[col].second));
    }
    return report;
}

nlohmann::json intrinsic_to_json(const IntrinsicReport& report) {
    nlohmann::json purity_obj = nlohmann::json::object();
    for (const auto& [name, value] : report.per_set_purity) {
        purity_obj[name] = value;
    }
    return {{"model", report.model_id}, {"purity", purity_obj}, {"average", report.average}};
}

nlohmann::json extrinsic_to_json(const ExtrinsicReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& cm : report.per_class) {
        per_class.push_back({{"label", cm.label},
                             {"precision", cm.precision},
                             {"recall", cm.recall},
                             {"f1", cm.f1},
                             {"support", cm.support}});
    }
    return {{"model", report.model_id},
            {"precision", report.precision},
            {"recall", report.recall},
            {"f1", report.f1},
            {"epochs", report.epochs},
            {"classes", report.classes},
            {"confusion", report.confusion},
            {"per_class", per_class}};
}

nlohmann::json comparison_to_json(const ComparisonReport& report) {
    nlohmann::json intr_cols = nlohmann::json::array();
    for (const auto& name : report.set_names) {
        intr_cols.push_back(name);
    }
    intr_cols.push_back("Average");
    nlohmann::json intr_rows = nlohmann::json::array();
    for (const auto& row : report.intrinsic) {
        intr_rows.push_back(intrinsic_to_json(row));
    }
    nlohmann::json extr_rows = nlohmann::json::array();
    for (const auto& row : report.extrinsic) {
        extr_rows.push_back(extrinsic_to_json(row));
    }
    nlohmann::json intr_winners = nlohmann::json::object();
    for (std::size_t col = 0; col < report.set_names.size(); ++col) {
        intr_winners[report.set_names[col]] = report.intrinsic_winners[col];
    }
    intr_winners["Average"] = report.intrinsic_winners.back();
    nlohmann::json deviations = nlohmann::json::object();
    for (const auto& [name, annotation] : report.deviations) {
        deviations[name] = annotation;
    }
    return {{"intrinsic", {{"columns", intr_cols}, {"rows", intr_rows}}},
            {"extrinsic",
             {{"columns", {"Precision", "Recall", "F1-Score"}}, {"rows", extr_rows}}},
            {"winners",
             {{"intrinsic", intr_winners},
              {"extrinsic",
               {{"Precision", report.extrinsic_winners[0]},
                {"Recall", report.extrinsic_winners[1]},
                {"F1-Score", report.extrinsic_winners[2]}}}}},
            {"deviations", deviations}};
}

namespace {

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// First column left-aligned, the rest right-aligned under their headers.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::string out;
    const auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == 0) {
                out += cells[c];
                out.append(width[c] - cells[c].size(), ' ');
            } else {
                out.append(2 + width[c] - cells[c].size(), ' ');
                out += cells[c];
            }
        }
        while (!out.empty() && out.back() == ' ') {
            out.pop_back();
        }
        out += "\n";
    };
    emit(header);
    for (const auto& row : rows) {
        emit(row);
    }
    return out;
}

} // namespace

std::string render_intrinsic_table(std::span<const IntrinsicReport> rows) {
    if (rows.empty()) {
        return "";
    }
    std::vector<std::string> header{"Model"};
    for (const auto& [name, value] : rows.front().per_set_purity) {
        header.push_back(name);
    }
    header.push_back("Average");
    std::vector<std::vector<std::string>> body;
    for (const auto& report : rows) {
        std::vector<std::string> cells{report.model_id};
        for (const auto& [name, value] : report.per_set_purity) {
            cells.push_back(format_score(value));
        }
        cells.push_back(format_score(report.average));
        body.push_back(std::move(cells));
    }
    return render_table(header, body);
}

std::string render_extrinsic_table(std::span<const ExtrinsicReport> rows) {
    const std::vector<std::string> header{"Model", "Precision", "Recall", "F1-Score"};
    std::vector<std::vector<std::string>> body;
    for (const auto& report : rows) {
        body.push_back({report.model_id, format_score(report.precision),
                        format_score(report.recall), format_score(report.f1)});
    }
    return render_table(header, body);
}

std::string render_comparison(const ComparisonReport& report) {
    std::string out = "Intrinsic evaluation (cluster purity)\n";
    out += render_intrinsic_table(report.intrinsic);
    out += "Best:";
    for (std::size_t col = 0; col < report.set_names.size(); ++col) {
        out += " " + report.set_names[col] + "=" + report.intrinsic_winners[col];
    }
    out += " Average=" + report.intrinsic_winners.back() + "\n";
    out += "Candidate vs baseline:";
    for (std::size_t i = 0; i < report.deviations.size(); ++i) {
        out += (i == 0 ? " " : "; ") + report.deviations[i].first + " " +
               report.deviations[i].second;
    }
    out += "\n\nExtrinsic evaluation (macro-averaged classification)\n";
    out += render_extrinsic_table(report.extrinsic);
    out += "Best: Precision=" + report.extrinsic_winners[0] +
           " Recall=" + report.extrinsic_winners[1] +
           " F1-Score=" + report.extrinsic_winners[2] + "\n";
    return out;
}

} // namespace nepembed
