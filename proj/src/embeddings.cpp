#include "qzero/embeddings.hpp"

#include <charconv>
#include <fstream>

#include <spdlog/spdlog.h>

#include "qzero/text.hpp"

namespace qzero {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        if (pos > start) fields.push_back(line.substr(start, pos - start));
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

template <typename Scalar>
std::optional<Eigen::Index> BasicVectorStore<Scalar>::find(std::string_view word) const {
    if (const auto it = exact_.find(std::string(word)); it != exact_.end()) return it->second;
    if (const auto it = folded_.find(text::to_lower(word)); it != folded_.end()) return it->second;
    return std::nullopt;
}

// A lowercase entry owns its folded key; otherwise the first cased spelling does.
template <typename Scalar>
void BasicVectorStore<Scalar>::index_folded(const std::string& word, Eigen::Index col) {
    auto lower = text::to_lower(word);
    if (lower == word) {
        folded_.insert_or_assign(std::move(lower), col);
    } else {
        folded_.try_emplace(std::move(lower), col);
    }
}

template <typename Scalar>
bool BasicVectorStore<Scalar>::add(std::string word, const Vector<Scalar>& v) {
    if (words_.empty() && vectors_.rows() == 0) vectors_.resize(v.size(), 0);
    if (v.size() != vectors_.rows()) {
        throw ContractError("vector for '" + word + "' has dimension " + std::to_string(v.size()) +
                            ", store has " + std::to_string(vectors_.rows()));
    }
    if (exact_.contains(word)) return false;
    const Eigen::Index col = vectors_.cols();
    vectors_.conservativeResize(Eigen::NoChange, col + 1);
    vectors_.col(col) = v;
    exact_.emplace(word, col);
    index_folded(word, col);
    words_.push_back(std::move(word));
    return true;
}

template <typename Scalar>
BasicVectorStore<Scalar> BasicVectorStore<Scalar>::load(std::istream& in) {
    BasicVectorStore store;
    std::vector<Scalar> values;
    std::vector<std::string> words;
    Eigen::Index dim = 0;
    std::size_t line_no = 0;
    std::size_t duplicates = 0;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::string line;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_fields(line);
        if (fields.empty()) continue;

        if (line_no == 1 && fields.size() == 2) {
            std::size_t count = 0;
            std::size_t header_dim = 0;
            if (parse_number(fields[0], count) && parse_number(fields[1], header_dim)) {
                if (header_dim == 0) throw FormatError("header declares zero dimensions", line_no);
                dim = static_cast<Eigen::Index>(header_dim);
                continue;
            }
        }

        const auto row_dim = static_cast<Eigen::Index>(fields.size() - 1);
        if (row_dim == 0) throw FormatError("word without vector values", line_no);
        if (dim == 0) dim = row_dim;
        if (row_dim != dim) {
            throw FormatError("expected " + std::to_string(dim) + " values, found " + std::to_string(row_dim),
                              line_no);
        }

        std::string word(fields[0]);
        if (const auto [it, inserted] = first_seen.emplace(word, line_no); !inserted) {
            ++duplicates;
            spdlog::warn("word vectors: duplicate word '{}' on line {} (first on line {}), keeping the first", word,
                         line_no, it->second);
            continue;
        }
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0;
            if (!parse_number(fields[i], v) || !std::isfinite(v)) {
                throw FormatError("unparseable vector value '" + std::string(fields[i]) + "'", line_no);
            }
            values.push_back(static_cast<Scalar>(v));
        }
        words.push_back(std::move(word));
    }
    if (words.empty()) throw FormatError("word-vector file contains no vectors");

    store.vectors_ = Eigen::Map<const Matrix<Scalar>>(values.data(), dim, static_cast<Eigen::Index>(words.size()));
    for (Eigen::Index col = 0; col < static_cast<Eigen::Index>(words.size()); ++col) {
        store.exact_.emplace(words[col], col);
        store.index_folded(words[col], col);
    }
    store.words_ = std::move(words);
    if (duplicates) spdlog::warn("word vectors: skipped {} duplicate words", duplicates);
    return store;
}

template <typename Scalar>
BasicVectorStore<Scalar> BasicVectorStore<Scalar>::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word-vector file " + path.string());
    return load(in);
}

template class BasicVectorStore<float>;
template class BasicVectorStore<double>;

bool is_phrase_connector(std::string_view token) noexcept {
    return token == "&" || text::is_punctuation_only(token);
}

template <typename Scalar>
PhraseEmbedding embed_phrase_detailed(const BasicVectorStore<Scalar>& store, std::string_view phrase) {
    if (text::trim(phrase).empty()) throw ContractError("embed_phrase: empty phrase");
    PhraseEmbedding out;
    EmbeddingVector sum = EmbeddingVector::Zero(store.dim());
    for (const auto token : text::split_whitespace(phrase)) {
        if (is_phrase_connector(token)) continue;
        if (const auto col = store.find(token)) {
            sum += store.vectors().col(*col).template cast<double>();
            out.used.emplace_back(token);
        } else {
            out.missing.emplace_back(token);
        }
    }
    if (out.used.empty()) throw Error("no word of phrase '" + std::string(phrase) + "' is in the vocabulary");
    for (const auto& word : out.missing) spdlog::debug("phrase '{}': '{}' is out of vocabulary", phrase, word);
    out.vector = sum / static_cast<double>(out.used.size());
    return out;
}

template PhraseEmbedding embed_phrase_detailed(const BasicVectorStore<float>&, std::string_view);
template PhraseEmbedding embed_phrase_detailed(const BasicVectorStore<double>&, std::string_view);

}  // namespace qzero
