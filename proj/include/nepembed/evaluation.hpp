#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nepembed/embeddings.hpp"
#include "nepembed/train.hpp"

namespace nepembed {

// ---- clustering ----

struct KmeansResult {
    std::vector<std::size_t> assignments;
    Eigen::MatrixXd centroids;         // [k, dim]
    double wcss = 0.0;
    std::vector<double> wcss_history;  // per Lloyd iteration of the winning restart
};

// k-means++ initialization, Lloyd iterations to an assignment fixpoint (at
// most 300), best of 10 restarts by within-cluster sum of squares.
// Deterministic given seed; requires 1 <= k <= n_points.
KmeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed);

// (1/N) * sum over clusters of the dominant gold-category overlap.
double purity(std::span<const std::size_t> assignments, std::span<const std::string> gold);

// ---- labeled data ----

// Items with gold categories; items are words for the clustering sets and
// sentences for the classification sets.
struct LabeledItems {
    std::string set_name;
    std::vector<std::string> items;
    std::vector<std::string> labels;

    std::size_t n_categories() const;
    // Alignment, non-emptiness, and a category-count floor (clustering sets
    // admit one category; classification needs two).
    void validate(std::size_t min_categories) const;
};

// One "item<TAB>category" per line, UTF-8, blank lines skipped.
LabeledItems load_labeled_items(const std::filesystem::path& path, std::string set_name);

struct LabeledVectorSet {
    std::string set_name;
    EmbeddingMatrix vectors;
    std::vector<std::string> gold_labels;
    std::size_t n_categories = 0;

    void validate(std::size_t min_categories = 2) const;
};

// Mean-pooled sentence embedding per item, keys = items.
LabeledVectorSet embed_items(const Embedder& embedder, const LabeledItems& items);

// ---- intrinsic evaluation ----

struct IntrinsicReport {
    std::vector<std::pair<std::string, double>> per_set_purity;  // set order preserved
    double average = 0.0;
    std::string model_id;
};

// Per set: embed items, cluster with k = category count, score purity;
// average is the arithmetic mean across sets.
IntrinsicReport intrinsic_eval(const Embedder& embedder, std::span<const LabeledItems> sets,
                               std::uint64_t seed, std::string model_id);

// ---- 2-D projection ----

struct Projection2D {
    Eigen::MatrixXd coords;       // [n, 2]
    Eigen::MatrixXd components;   // [dim, 2], orthonormal columns
    Eigen::VectorXd eigenvalues;  // all, descending
    Eigen::RowVectorXd mean;
};

// Top-2 principal components with deterministic sign fixing. The math has no
// randomness; seed is accepted for interface uniformity. Requires n >= 3,
// dim >= 2, and at least two distinct points.
Projection2D project_2d(const Eigen::MatrixXd& vectors, std::uint64_t seed);

// "key x y cluster gold" per line, for external plotting.
void export_projection(const std::filesystem::path& path, std::span<const std::string> keys,
                       const Eigen::MatrixXd& coords, std::span<const std::size_t> assignments,
                       std::span<const std::string> gold);

// ---- extrinsic evaluation ----

// Linear softmax probe over frozen embeddings.
struct Classifier {
    Eigen::MatrixXd w;      // [dim, n_classes]
    Eigen::MatrixXd b;      // [1, n_classes]
    std::vector<std::string> classes;  // sorted; row/col index -> label
};

// Mini-batch gradient descent with seeded shuffles, spec.epochs passes,
// cross-entropy loss. Zero-initialized, so 0 epochs means an untrained head.
Classifier train_classifier(const LabeledVectorSet& train, const TrainSpec& spec);

std::vector<std::string> classify(const Classifier& clf, const Eigen::MatrixXd& vectors);

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ExtrinsicReport {
    double precision = 0.0;  // macro
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
    std::vector<std::string> classes;                 // sorted union, confusion order
    std::size_t epochs = 0;
    std::string model_id;
};

// Per-class scores from the confusion matrix; macro values are unweighted
// class means; an undefined ratio scores 0.
ExtrinsicReport macro_metrics(std::span<const std::string> predictions,
                              std::span<const std::string> gold);

// Embed, train the probe on train, score macro metrics on test.
ExtrinsicReport extrinsic_eval(const Embedder& embedder, const LabeledItems& train,
                               const LabeledItems& test, const TrainSpec& spec,
                               std::string model_id);

// ---- model comparison ----

struct ModelBundle {
    std::string id;
    Checkpoint ckpt;
    Vocab vocab;
};

// Rows in model order (baseline, candidate, oracle). Winner lists name the
// model with the highest value per column, first on ties; deviations
// annotate candidate vs baseline per clustering set in percentage points.
struct ComparisonReport {
    std::vector<std::string> set_names;
    std::vector<IntrinsicReport> intrinsic;
    std::vector<ExtrinsicReport> extrinsic;
    std::vector<std::string> intrinsic_winners;  // per set, then average
    std::vector<std::string> extrinsic_winners;  // precision, recall, f1
    std::vector<std::pair<std::string, std::string>> deviations;  // set -> "23% lead"
};

ComparisonReport compare_models(std::span<const ModelBundle> models,
                                std::span<const LabeledItems> intrinsic_sets,
                                const LabeledItems& train, const LabeledItems& test,
                                const TrainSpec& probe_spec, std::uint64_t seed);

// "<n>% lead" / "<n>% lag" / "even", from the rounded percentage-point gap.
std::string deviation_annotation(double candidate, double baseline);

nlohmann::json intrinsic_to_json(const IntrinsicReport& report);
nlohmann::json extrinsic_to_json(const ExtrinsicReport& report);
nlohmann::json comparison_to_json(const ComparisonReport& report);

std::string render_intrinsic_table(std::span<const IntrinsicReport> rows);
std::string render_extrinsic_table(std::span<const ExtrinsicReport> rows);
std::string render_comparison(const ComparisonReport& report);

} // namespace nepembed
