#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qzero/embeddings.hpp"
#include "qzero/reformulate.hpp"
#include "qzero/remote_embedder.hpp"

namespace qzero {

/// Ordered, distinct candidate labels. Declaration order breaks score ties.
class LabelSet {
public:
    explicit LabelSet(std::vector<std::string> labels);

    /// One label per line; blank lines are skipped.
    static LabelSet load(std::istream& in);
    static LabelSet load(const std::filesystem::path& path);

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& operator[](std::size_t i) const { return labels_[i]; }
    std::optional<std::size_t> index_of(std::string_view label) const;

private:
    std::vector<std::string> labels_;
};

/// Per-label scores aligned with the LabelSet order.
struct ScoreTable {
    std::vector<std::string> labels;
    std::vector<double> scores;
    std::size_t best = 0;  ///< first label holding the maximum score
    double margin = 0.0;   ///< best score minus runner-up score

    static ScoreTable from_scores(const LabelSet& labels, std::vector<double> scores);

    const std::string& best_label() const { return labels[best]; }
    double score(std::string_view label) const;
};

enum class ClassificationMode { contextual, static_keywords, baseline_contextual, baseline_static };

std::string_view to_string(ClassificationMode mode) noexcept;

/// Retrieved categories and top keywords behind a prediction.
struct Explain {
    std::vector<CategoryRef> categories;
    std::vector<KeywordCount> keywords;
};

inline constexpr std::size_t kExplainCategories = 50;
inline constexpr std::size_t kExplainKeywords = 10;

struct ClassificationResult {
    std::string predicted;
    ScoreTable table;
    ClassificationMode mode = ClassificationMode::contextual;
    std::optional<Explain> explain;
    /// Keywords (or raw words) that had no usable vector.
    std::vector<std::string> oov;
    /// Non-fatal notes, such as the reason for a baseline fallback.
    std::vector<std::string> notes;
};

/// Cosine between the embedding of `query_text` and each label embedding.
/// Query and labels go to the embedder in one call.
ClassificationResult classify_contextual(std::string_view query_text, const LabelSet& labels,
                                         const SentenceEmbedder& embedder);

/// Weighted keyword scoring: score(y) = sum over (K, w) of w * cos(K, y).
/// Out-of-vocabulary keywords contribute nothing and are listed in `oov`.
ClassificationResult classify_static(const WeightedKeywordQuery& query, const LabelSet& labels,
                                     const StaticVectorStore& store);

/// classify_static with unit weights over the distinct words of the raw text.
ClassificationResult classify_static_baseline(std::string_view raw_text, const LabelSet& labels,
                                              const StaticVectorStore& store);

/// Cosine between the mean vector of the raw text's in-vocabulary words and each label.
ClassificationResult classify_static_baseline_avg(std::string_view raw_text, const LabelSet& labels,
                                                  const StaticVectorStore& store);

}  // namespace qzero
