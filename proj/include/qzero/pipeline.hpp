#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "qzero/classify.hpp"

namespace qzero {

/// Query form handed to the classifier.
enum class PipelineMode {
    sentence,  ///< concatenated categories, contextual embedder
    keywords,  ///< weighted keywords, static word vectors
};

std::string_view to_string(PipelineMode mode) noexcept;
PipelineMode parse_pipeline_mode(std::string_view name);

enum class StaticBaseline {
    averaged,      ///< cosine between the mean word vector and each label
    unit_weights,  ///< keyword scoring with every weight set to 1
};

struct PipelineOptions {
    std::size_t top_k = kDefaultTopK;
    std::size_t token_budget = kDefaultTokenBudget;
    ExtractorConfig extractor;
    StaticBaseline baseline = StaticBaseline::averaged;
    bool explain = false;
    /// Skip retrieval and classify the raw text directly.
    bool baseline_only = false;
};

/// Non-owning references to the components a pipeline needs. Sentence mode
/// needs a tokenizer and an embedder; keyword mode needs a vector store.
struct PipelineComponents {
    const Retriever* retriever = nullptr;
    const Tokenizer* tokenizer = nullptr;
    const SentenceEmbedder* embedder = nullptr;
    const StaticVectorStore* store = nullptr;
};

/// Failure in one pipeline stage ("retrieve", "reformulate", "classify", "baseline").
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// retrieve -> reformulate -> classify, falling back to the matching baseline
/// when retrieval or reformulation produces nothing usable.
class Pipeline {
public:
    Pipeline(PipelineMode mode, PipelineComponents components, PipelineOptions options);

    ClassificationResult classify(const RawQuery& raw, const LabelSet& labels) const;

    /// The baseline classifier for this mode applied to the raw text.
    ClassificationResult classify_baseline(const RawQuery& raw, const LabelSet& labels) const;

    PipelineMode mode() const noexcept { return mode_; }
    const PipelineOptions& options() const noexcept { return options_; }

private:
    ClassificationResult fallback(const RawQuery& raw, const LabelSet& labels, std::string reason) const;

    PipelineMode mode_;
    PipelineComponents components_;
    PipelineOptions options_;
};

inline ClassificationResult run_pipeline(const RawQuery& raw, const LabelSet& labels, PipelineMode mode,
                                         const PipelineComponents& components, const PipelineOptions& options) {
    return Pipeline(mode, components, options).classify(raw, labels);
}

}  // namespace qzero
