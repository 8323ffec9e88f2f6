#include "qzero/reformulate.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "qzero/error.hpp"
#include "qzero/subprocess.hpp"
#include "qzero/text.hpp"

namespace qzero {

RawQuery::RawQuery(std::string text) : text_(std::move(text)) {
    if (text::trim(text_).empty()) throw ContractError("query text is empty");
}

std::string_view to_string(ExtractionStrategy s) noexcept {
    switch (s) {
    case ExtractionStrategy::capitalization: return "capitalization";
    case ExtractionStrategy::nounlite: return "nounlite";
    case ExtractionStrategy::external: return "external";
    }
    return "unknown";
}

ExtractionStrategy parse_extraction_strategy(std::string_view name) {
    if (name == "capitalization") return ExtractionStrategy::capitalization;
    if (name == "nounlite") return ExtractionStrategy::nounlite;
    if (name == "external") return ExtractionStrategy::external;
    throw ContractError("unknown keyword extraction strategy '" + std::string(name) + "'");
}

void ExtractorConfig::validate() const {
    const bool is_external = strategy == ExtractionStrategy::external;
    if (is_external && (!external_command || external_command->empty())) {
        throw ContractError("external keyword extraction needs a command");
    }
    if (!is_external && external_command) {
        throw ContractError("an external command is only valid with the external strategy");
    }
}

std::vector<RankedArticle> retrieve_categories(const RawQuery& query, const Retriever& retriever, std::size_t k) {
    if (k < 1) throw ContractError("retrieve_categories: k must be >= 1");
    auto articles = retriever.retrieve(query.text(), k);
    for (std::size_t i = 0; i < articles.size(); ++i) articles[i].rank = i + 1;
    return articles;
}

namespace {

std::vector<const RankedArticle*> by_rank(std::span<const RankedArticle> articles) {
    std::vector<const RankedArticle*> ordered;
    ordered.reserve(articles.size());
    for (const auto& a : articles) ordered.push_back(&a);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const RankedArticle* a, const RankedArticle* b) { return a->rank < b->rank; });
    return ordered;
}

std::vector<KeywordCount> sorted_counts(const std::map<std::string, std::size_t>& counts) {
    std::vector<KeywordCount> out;
    out.reserve(counts.size());
    for (const auto& [keyword, n] : counts) out.push_back({keyword, n});
    // std::map already yields keywords ascending; a stable sort keeps that as the tie-break.
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
    return out;
}

std::map<std::string, std::size_t> run_external(std::span<const std::string> categories, const std::string& command) {
    std::string input;
    for (const auto& c : categories) {
        input += c;
        input += '\n';
    }
    const auto result = run_command(command, input);
    if (result.exit_code != 0) {
        throw Error("keyword extractor '" + command + "' exited with status " + std::to_string(result.exit_code) +
                    (result.err.empty() ? "" : ": " + std::string(text::trim(result.err))));
    }
    std::map<std::string, std::size_t> counts;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < result.out.size()) {
        const auto nl = result.out.find('\n', pos);
        std::string_view line(result.out.data() + pos, (nl == std::string::npos ? result.out.size() : nl) - pos);
        pos = nl == std::string::npos ? result.out.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        std::size_t n = 0;
        const auto count_field = tab == std::string_view::npos ? std::string_view{} : line.substr(tab + 1);
        const auto [ptr, ec] = std::from_chars(count_field.data(), count_field.data() + count_field.size(), n);
        if (tab == std::string_view::npos || tab == 0 || ec != std::errc() ||
            ptr != count_field.data() + count_field.size()) {
            throw Error("keyword extractor '" + command + "' output line " + std::to_string(line_no) +
                        " is not 'keyword<TAB>count': " + std::string(line));
        }
        if (n > 0) counts[std::string(line.substr(0, tab))] += n;
    }
    return counts;
}

}  // namespace

std::vector<std::string> flatten_categories(std::span<const RankedArticle> articles) {
    std::vector<std::string> out;
    for (const auto* a : by_rank(articles)) out.insert(out.end(), a->categories.begin(), a->categories.end());
    return out;
}

SentenceQuery make_sentence_query(std::span<const RankedArticle> articles, const Tokenizer& tokenizer,
                                  std::size_t budget) {
    if (budget < 1) throw ContractError("make_sentence_query: budget must be >= 1");
    std::string joined;
    std::vector<std::pair<std::size_t, CategoryRef>> offsets;
    for (const auto* a : by_rank(articles)) {
        for (const auto& c : a->categories) {
            const auto trimmed = text::trim(c);
            if (trimmed.empty()) continue;
            if (!joined.empty()) joined += ' ';
            offsets.push_back({joined.size(), {a->rank, std::string(trimmed)}});
            joined += trimmed;
        }
    }

    SentenceQuery query;
    if (joined.empty()) return query;
    auto cut = tokenizer.truncate(joined, budget);
    query.text = std::move(cut.text);
    query.token_count = cut.token_count;
    for (auto& [offset, ref] : offsets) {
        if (offset >= query.text.size()) break;
        query.source_ranks.push_back(std::move(ref));
    }
    return query;
}

std::vector<std::string> capitalized_keywords(std::string_view category) {
    std::vector<std::string> out;
    const auto tokens = text::split_alnum(category);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        std::size_t pos = 0;
        if (text::is_upper(text::decode_next(tokens[i], pos))) out.emplace_back(tokens[i]);
    }
    return out;
}

std::vector<std::string> nounlite_keywords(std::string_view category, const std::unordered_set<std::string>& stopwords) {
    std::vector<std::string> out;
    for (const auto token : text::split_alnum(category)) {
        std::string lower = text::to_lower(token);
        std::size_t chars = 0;
        for (std::size_t pos = 0; pos < lower.size() && chars < 2; ++chars) text::decode_next(lower, pos);
        if (chars < 2 || stopwords.contains(lower)) continue;
        out.push_back(std::move(lower));
    }
    return out;
}

std::vector<KeywordCount> extract_keywords(std::span<const std::string> categories, const ExtractorConfig& config) {
    config.validate();
    if (categories.empty()) return {};
    std::map<std::string, std::size_t> counts;
    switch (config.strategy) {
    case ExtractionStrategy::capitalization:
        for (const auto& c : categories) {
            for (auto& k : capitalized_keywords(c)) ++counts[std::move(k)];
        }
        break;
    case ExtractionStrategy::nounlite:
        for (const auto& c : categories) {
            for (auto& k : nounlite_keywords(c, config.stopwords)) ++counts[std::move(k)];
        }
        break;
    case ExtractionStrategy::external:
        counts = run_external(categories, *config.external_command);
        break;
    }
    return sorted_counts(counts);
}

WeightedKeywordQuery make_keyword_query(std::span<const RankedArticle> articles, const ExtractorConfig& config) {
    const auto categories = flatten_categories(articles);
    WeightedKeywordQuery query{extract_keywords(categories, config)};
    if (query.entries.empty()) throw Error("no keywords extracted");
    return query;
}

}  // namespace qzero
