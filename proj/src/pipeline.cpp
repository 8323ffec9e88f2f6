#include "qzero/pipeline.hpp"

#include <algorithm>

namespace qzero {

std::string_view to_string(PipelineMode mode) noexcept {
    return mode == PipelineMode::sentence ? "sentence" : "keywords";
}

PipelineMode parse_pipeline_mode(std::string_view name) {
    if (name == "sentence") return PipelineMode::sentence;
    if (name == "keywords") return PipelineMode::keywords;
    throw ContractError("unknown pipeline mode '" + std::string(name) + "'");
}

Pipeline::Pipeline(PipelineMode mode, PipelineComponents components, PipelineOptions options)
    : mode_(mode), components_(components), options_(std::move(options)) {
    if (options_.top_k < 1) throw ContractError("top_k must be >= 1");
    if (options_.token_budget < 1) throw ContractError("token budget must be >= 1");
    if (!options_.baseline_only && !components_.retriever) throw ContractError("pipeline needs a retriever");
    if (mode_ == PipelineMode::sentence) {
        if (!components_.embedder) throw ContractError("sentence mode needs a contextual embedder");
        if (!options_.baseline_only && !components_.tokenizer) throw ContractError("sentence mode needs a tokenizer");
    } else {
        if (!components_.store) throw ContractError("keyword mode needs static word vectors");
        options_.extractor.validate();
    }
}

namespace {

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(stage, e.what());
    }
}

Explain make_explain(std::span<const RankedArticle> articles, std::vector<KeywordCount> keywords) {
    Explain explain;
    for (const auto& a : articles) {
        for (const auto& c : a.categories) {
            if (explain.categories.size() == kExplainCategories) break;
            explain.categories.push_back({a.rank, c});
        }
    }
    if (keywords.size() > kExplainKeywords) keywords.resize(kExplainKeywords);
    explain.keywords = std::move(keywords);
    return explain;
}

}  // namespace

ClassificationResult Pipeline::classify_baseline(const RawQuery& raw, const LabelSet& labels) const {
    return staged("baseline", [&] {
        if (mode_ == PipelineMode::sentence) {
            auto result = classify_contextual(raw.text(), labels, *components_.embedder);
            result.mode = ClassificationMode::baseline_contextual;
            return result;
        }
        return options_.baseline == StaticBaseline::averaged
                   ? classify_static_baseline_avg(raw.text(), labels, *components_.store)
                   : classify_static_baseline(raw.text(), labels, *components_.store);
    });
}

ClassificationResult Pipeline::fallback(const RawQuery& raw, const LabelSet& labels, std::string reason) const {
    auto result = classify_baseline(raw, labels);
    result.notes.push_back("fell back to baseline: " + std::move(reason));
    if (options_.explain) result.explain = Explain{};
    return result;
}

ClassificationResult Pipeline::classify(const RawQuery& raw, const LabelSet& labels) const {
    if (options_.baseline_only) return classify_baseline(raw, labels);

    const auto articles =
        staged("retrieve", [&] { return retrieve_categories(raw, *components_.retriever, options_.top_k); });
    if (articles.empty()) return fallback(raw, labels, "no articles retrieved");

    if (mode_ == PipelineMode::sentence) {
        const auto query = staged("reformulate", [&] {
            return make_sentence_query(articles, *components_.tokenizer, options_.token_budget);
        });
        if (query.text.empty()) return fallback(raw, labels, "retrieved articles have no categories");
        auto result = staged("classify", [&] { return classify_contextual(query.text, labels, *components_.embedder); });
        if (options_.explain) {
            std::vector<KeywordCount> keywords;
            try {
                keywords = extract_keywords(flatten_categories(articles), options_.extractor);
            } catch (const std::exception& e) {
                result.notes.push_back(std::string("explain keywords unavailable: ") + e.what());
            }
            result.explain = make_explain(articles, std::move(keywords));
        }
        return result;
    }

    const auto keywords =
        staged("reformulate", [&] { return extract_keywords(flatten_categories(articles), options_.extractor); });
    if (keywords.empty()) return fallback(raw, labels, "no keywords extracted");
    const bool any_in_vocab = std::any_of(keywords.begin(), keywords.end(),
                                          [&](const KeywordCount& k) { return components_.store->find(k.keyword).has_value(); });
    if (!any_in_vocab) return fallback(raw, labels, "no extracted keyword is in the vocabulary");

    WeightedKeywordQuery query{keywords};
    auto result = staged("classify", [&] { return classify_static(query, labels, *components_.store); });
    if (options_.explain) result.explain = make_explain(articles, keywords);
    return result;
}

}  // namespace qzero
