#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qzero/index.hpp"
#include "qzero/tokenizer.hpp"

namespace qzero {

/// Input text to classify. Non-empty after trimming.
class RawQuery {
public:
    explicit RawQuery(std::string text);
    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

/// Token budget applied to the concatenated-category query.
inline constexpr std::size_t kDefaultTokenBudget = 512;

struct CategoryRef {
    std::size_t rank = 0;
    std::string category;

    friend bool operator==(const CategoryRef&, const CategoryRef&) = default;
};

/// Categories of the retrieved articles joined in rank order and cut to a token budget.
struct SentenceQuery {
    std::string text;
    std::size_t token_count = 0;
    /// Every category that contributes at least one character to `text`, in order.
    std::vector<CategoryRef> source_ranks;
};

struct KeywordCount {
    std::string keyword;
    std::size_t weight = 0;

    friend bool operator==(const KeywordCount&, const KeywordCount&) = default;
};

/// Keywords with their occurrence counts, ordered by weight desc then keyword asc.
struct WeightedKeywordQuery {
    std::vector<KeywordCount> entries;
};

enum class ExtractionStrategy { capitalization, nounlite, external };

std::string_view to_string(ExtractionStrategy s) noexcept;
ExtractionStrategy parse_extraction_strategy(std::string_view name);

struct ExtractorConfig {
    ExtractionStrategy strategy = ExtractionStrategy::nounlite;
    std::unordered_set<std::string> stopwords = english_stopwords();
    /// Shell command for the external strategy: reads categories one per line
    /// on stdin, writes "keyword<TAB>count" lines on stdout.
    std::optional<std::string> external_command;

    /// Throws ContractError unless external_command is set exactly when strategy is external.
    void validate() const;
};

/// Ranked articles for the query; ranks are contiguous from 1.
std::vector<RankedArticle> retrieve_categories(const RawQuery& query, const Retriever& retriever,
                                               std::size_t k = kDefaultTopK);

/// Joins the categories of all articles (rank 1 first, duplicates kept) with
/// single spaces and keeps the first `budget` tokens.
SentenceQuery make_sentence_query(std::span<const RankedArticle> articles, const Tokenizer& tokenizer,
                                  std::size_t budget = kDefaultTokenBudget);

/// Tokens of `category` that start with an uppercase letter, excluding the first token.
std::vector<std::string> capitalized_keywords(std::string_view category);

/// Lowercased tokens of `category` minus stopwords and single characters.
std::vector<std::string> nounlite_keywords(std::string_view category, const std::unordered_set<std::string>& stopwords);

/// Keyword occurrence counts over all categories, ordered by count desc then keyword asc.
std::vector<KeywordCount> extract_keywords(std::span<const std::string> categories, const ExtractorConfig& config);

/// Keyword query over every category of every article (no token budget).
/// Throws Error("no keywords extracted") when extraction yields nothing.
WeightedKeywordQuery make_keyword_query(std::span<const RankedArticle> articles, const ExtractorConfig& config);

/// All categories of `articles` in rank order.
std::vector<std::string> flatten_categories(std::span<const RankedArticle> articles);

}  // namespace qzero
