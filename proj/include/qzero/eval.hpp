#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qzero/classify.hpp"

namespace qzero {

struct LabeledExample {
    std::string text;
    std::string gold;
    std::size_t line = 0;
};

struct DatasetStats {
    std::size_t examples = 0;
    std::size_t blank_lines = 0;
    std::size_t comment_lines = 0;
};

/// Reads `text<TAB>gold` lines. Lines starting with '#' and blank lines are
/// skipped. Throws FormatError on an unknown gold label, a line without a tab
/// or a file with no examples.
std::vector<LabeledExample> load_dataset(std::istream& in, const LabelSet& labels, DatasetStats* stats = nullptr);
std::vector<LabeledExample> load_dataset(const std::filesystem::path& path, const LabelSet& labels,
                                         DatasetStats* stats = nullptr);

struct LabelTally {
    std::size_t correct = 0;
    std::size_t total = 0;
};

struct ExampleFailure {
    std::size_t line = 0;
    std::string message;
};

struct EvalReport {
    std::string dataset_name;
    std::string mode;
    double accuracy = 0.0;  ///< accuracy of the first run
    std::size_t n = 0;
    std::vector<std::pair<std::string, LabelTally>> per_label;  ///< label-set order
    std::string config_fingerprint;
    std::size_t runs = 1;
    std::vector<double> run_accuracies;
    double accuracy_mean_over_runs = 0.0;
    double accuracy_variance = 0.0;
    std::size_t failures = 0;  ///< examples that raised an error (counted incorrect)
    std::vector<ExampleFailure> failure_samples;
};

void to_json(nlohmann::json& j, const EvalReport& report);
void from_json(const nlohmann::json& j, EvalReport& report);

using Classifier = std::function<ClassificationResult(const RawQuery&)>;

struct EvalOptions {
    std::string dataset_name;
    std::string mode;
    std::string config_fingerprint;
    std::size_t runs = 3;
    std::size_t jobs = 1;
    /// Require identical accuracy across runs (local providers).
    bool deterministic = true;
};

/// Runs every example `runs` times. Examples whose classification throws
/// count as incorrect. Throws Error when `deterministic` is set and runs disagree.
EvalReport evaluate(const std::vector<LabeledExample>& examples, const LabelSet& labels, const Classifier& classify,
                    const EvalOptions& options);

/// Table-4 style comparison of a baseline report and a second report.
struct Comparison {
    std::string dataset_name;
    std::string base_mode;
    std::string other_mode;
    double base_percent = 0.0;
    double other_percent = 0.0;
    double delta_points = 0.0;  ///< other - base, in percentage points

    /// "46.37 +13.00"
    std::string render() const;
};

/// Throws Error when the reports cover different datasets or sizes.
Comparison compare(const EvalReport& base, const EvalReport& other);

/// Two decimals with an explicit sign ("+13.00", "-1.57", "0.00").
std::string format_delta(double points);

struct SweepPoint {
    std::size_t k = 0;
    std::optional<double> accuracy;  ///< empty when the evaluation at this k failed
    std::string error;
};

struct SweepReport {
    std::string dataset_name;
    std::string mode;
    std::string config_fingerprint;
    std::vector<SweepPoint> points;
};

void to_json(nlohmann::json& j, const SweepReport& report);

/// Default retrieved-document counts for a sweep.
inline const std::vector<std::size_t> kDefaultSweepKs = {5, 10, 25, 50, 100};

/// One evaluation per k (single run each), everything else fixed.
/// `make_classifier(k)` builds the classifier for a given retrieval depth.
SweepReport sweep_k(const std::vector<LabeledExample>& examples, const LabelSet& labels,
                    const std::function<Classifier(std::size_t)>& make_classifier, const std::vector<std::size_t>& ks,
                    const EvalOptions& options);

/// "k<TAB>accuracy" lines; failed points are written as "k<TAB>nan".
void write_sweep_tsv(std::ostream& out, const SweepReport& report);

/// FNV-1a 64 over the compact JSON dump, as 16 hex digits.
std::string fingerprint(const nlohmann::json& config);

}  // namespace qzero
