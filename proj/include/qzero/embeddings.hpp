#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "qzero/error.hpp"

namespace qzero {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Embedding of a word, phrase, sentence or label.
using EmbeddingVector = Vector<double>;

/// Cosine similarity, clamped to [-1, 1].
///
/// Throws ContractError on a dimension mismatch or a zero-norm argument;
/// zero vectors carry no direction and callers are expected to filter them.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size()) {
        throw ContractError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
    }
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0)) throw ContractError("cosine: zero-norm vector");
    const Scalar c = a.dot(b.template cast<Scalar>()) / (na * nb);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Static word-vector table: one column per word.
///
/// Lookup tries the exact surface form first, then the first word (in file
/// order) whose lowercase form matches the lowercased query.
template <typename Scalar>
class BasicVectorStore {
public:
    BasicVectorStore() = default;
    explicit BasicVectorStore(Eigen::Index dim) : vectors_(dim, 0) {}

    Eigen::Index dim() const noexcept { return vectors_.rows(); }
    std::size_t size() const noexcept { return words_.size(); }
    const std::vector<std::string>& words() const noexcept { return words_; }
    const Matrix<Scalar>& vectors() const noexcept { return vectors_; }

    /// Column index of `word` under the two-step lookup.
    std::optional<Eigen::Index> find(std::string_view word) const;

    std::optional<Vector<Scalar>> lookup(std::string_view word) const {
        const auto col = find(word);
        if (!col) return std::nullopt;
        return Vector<Scalar>(vectors_.col(*col));
    }

    /// Adds a word; returns false (and keeps the existing vector) on a duplicate.
    bool add(std::string word, const Vector<Scalar>& v);

    /// Reads the word-vector text format: an optional "<count> <dim>" header,
    /// then "<word> <v1> ... <vdim>" per line.
    static BasicVectorStore load(std::istream& in);
    static BasicVectorStore load(const std::filesystem::path& path);

private:
    Matrix<Scalar> vectors_;
    std::vector<std::string> words_;
    std::unordered_map<std::string, Eigen::Index> exact_;
    std::unordered_map<std::string, Eigen::Index> folded_;

    void index_folded(const std::string& word, Eigen::Index col);
};

using StaticVectorStore = BasicVectorStore<double>;

extern template class BasicVectorStore<float>;
extern template class BasicVectorStore<double>;

/// Vector for `word`, or nullopt when it is not in the store.
template <typename Scalar>
std::optional<EmbeddingVector> embed_word(const BasicVectorStore<Scalar>& store, std::string_view word) {
    const auto col = store.find(word);
    if (!col) return std::nullopt;
    return store.vectors().col(*col).template cast<double>();
}

struct PhraseEmbedding {
    EmbeddingVector vector;
    std::vector<std::string> used;
    std::vector<std::string> missing;
};

/// True for tokens dropped before phrase averaging: "&" and pure punctuation.
bool is_phrase_connector(std::string_view token) noexcept;

/// Mean of the in-vocabulary constituent words of `phrase` (whitespace split,
/// connectors dropped). Throws Error naming the phrase when none is in the store.
template <typename Scalar>
PhraseEmbedding embed_phrase_detailed(const BasicVectorStore<Scalar>& store, std::string_view phrase);

template <typename Scalar>
EmbeddingVector embed_phrase(const BasicVectorStore<Scalar>& store, std::string_view phrase) {
    return embed_phrase_detailed(store, phrase).vector;
}

extern template PhraseEmbedding embed_phrase_detailed(const BasicVectorStore<float>&, std::string_view);
extern template PhraseEmbedding embed_phrase_detailed(const BasicVectorStore<double>&, std::string_view);

}  // namespace qzero
