#include "qzero/classify.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "qzero/error.hpp"
#include "qzero/text.hpp"

namespace qzero {

LabelSet::LabelSet(std::vector<std::string> labels) {
    for (auto& label : labels) {
        const auto trimmed = text::trim(label);
        if (trimmed.empty()) throw ContractError("labels must be non-empty");
        if (index_of(trimmed)) throw ContractError("duplicate label '" + std::string(trimmed) + "'");
        labels_.emplace_back(trimmed);
    }
    if (labels_.size() < 2) throw ContractError("a label set needs at least two labels");
}

LabelSet LabelSet::load(std::istream& in) {
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!text::trim(line).empty()) labels.push_back(line);
    }
    return LabelSet(std::move(labels));
}

LabelSet LabelSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label file " + path.string());
    return load(in);
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return i;
    }
    return std::nullopt;
}

ScoreTable ScoreTable::from_scores(const LabelSet& labels, std::vector<double> scores) {
    if (scores.size() != labels.size()) throw ContractError("one score per label required");
    ScoreTable table;
    table.labels = labels.labels();
    table.scores = std::move(scores);
    for (std::size_t i = 1; i < table.scores.size(); ++i) {
        if (table.scores[i] > table.scores[table.best]) table.best = i;
    }
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.scores.size(); ++i) {
        if (i != table.best) runner_up = std::max(runner_up, table.scores[i]);
    }
    table.margin = table.scores[table.best] - runner_up;
    return table;
}

double ScoreTable::score(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return scores[i];
    }
    throw ContractError("no score for label '" + std::string(label) + "'");
}

std::string_view to_string(ClassificationMode mode) noexcept {
    switch (mode) {
    case ClassificationMode::contextual: return "contextual";
    case ClassificationMode::static_keywords: return "static";
    case ClassificationMode::baseline_contextual: return "baseline-contextual";
    case ClassificationMode::baseline_static: return "baseline-static";
    }
    return "unknown";
}

namespace {

ClassificationResult make_result(const LabelSet& labels, std::vector<double> scores, ClassificationMode mode) {
    ClassificationResult result;
    result.table = ScoreTable::from_scores(labels, std::move(scores));
    result.predicted = result.table.best_label();
    result.mode = mode;
    return result;
}

std::vector<EmbeddingVector> label_vectors(const LabelSet& labels, const StaticVectorStore& store) {
    std::vector<EmbeddingVector> out;
    out.reserve(labels.size());
    for (const auto& label : labels.labels()) {
        EmbeddingVector v;
        try {
            v = embed_phrase(store, label);
        } catch (const Error&) {
            throw Error("label '" + label + "' has no in-vocabulary words");
        }
        if (v.norm() == 0.0) throw Error("label '" + label + "' embeds to the zero vector");
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

ClassificationResult classify_contextual(std::string_view query_text, const LabelSet& labels,
                                         const SentenceEmbedder& embedder) {
    if (text::trim(query_text).empty()) {
        throw Error("empty query after reformulation; classify the raw query with the baseline instead");
    }
    std::vector<std::string> texts;
    texts.reserve(labels.size() + 1);
    texts.emplace_back(query_text);
    texts.insert(texts.end(), labels.labels().begin(), labels.labels().end());
    const auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) throw Error("embedder returned the wrong number of vectors");

    std::vector<double> scores;
    scores.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) scores.push_back(cosine(vectors[0], vectors[i + 1]));
    return make_result(labels, std::move(scores), ClassificationMode::contextual);
}

ClassificationResult classify_static(const WeightedKeywordQuery& query, const LabelSet& labels,
                                     const StaticVectorStore& store) {
    if (query.entries.empty()) throw ContractError("classify_static: empty keyword query");
    const auto label_vecs = label_vectors(labels, store);

    struct Term {
        EmbeddingVector vec;
        double weight;
    };
    std::vector<Term> terms;
    std::vector<std::string> oov;
    for (const auto& [keyword, weight] : query.entries) {
        auto v = embed_word(store, keyword);
        if (!v || v->norm() == 0.0) {
            oov.push_back(keyword);
            continue;
        }
        terms.push_back({std::move(*v), static_cast<double>(weight)});
    }
    if (terms.empty()) throw Error("none of the " + std::to_string(query.entries.size()) + " keywords is in the vocabulary");

    std::vector<double> scores(labels.size(), 0.0);
    for (std::size_t y = 0; y < labels.size(); ++y) {
        for (const auto& term : terms) scores[y] += cosine(term.vec, label_vecs[y]) * term.weight;
    }
    auto result = make_result(labels, std::move(scores), ClassificationMode::static_keywords);
    result.oov = std::move(oov);
    return result;
}

ClassificationResult classify_static_baseline(std::string_view raw_text, const LabelSet& labels,
                                              const StaticVectorStore& store) {
    WeightedKeywordQuery query;
    std::set<std::string> seen;
    for (const auto word : text::split_alnum(raw_text)) {
        if (seen.emplace(word).second) query.entries.push_back({std::string(word), 1});
    }
    if (query.entries.empty()) throw Error("raw text has no words");
    auto result = classify_static(query, labels, store);
    result.mode = ClassificationMode::baseline_static;
    return result;
}

ClassificationResult classify_static_baseline_avg(std::string_view raw_text, const LabelSet& labels,
                                                  const StaticVectorStore& store) {
    const auto label_vecs = label_vectors(labels, store);
    EmbeddingVector sum = EmbeddingVector::Zero(store.dim());
    std::size_t used = 0;
    std::vector<std::string> oov;
    for (const auto word : text::split_alnum(raw_text)) {
        if (const auto col = store.find(word)) {
            sum += store.vectors().col(*col);
            ++used;
        } else {
            oov.emplace_back(word);
        }
    }
    if (used == 0) throw Error("no word of the raw text is in the vocabulary");
    const EmbeddingVector mean = sum / static_cast<double>(used);
    if (mean.norm() == 0.0) throw Error("raw text averages to the zero vector");

    std::vector<double> scores;
    scores.reserve(labels.size());
    for (const auto& lv : label_vecs) scores.push_back(cosine(mean, lv));
    auto result = make_result(labels, std::move(scores), ClassificationMode::baseline_static);
    result.oov = std::move(oov);
    return result;
}

}  // namespace qzero
