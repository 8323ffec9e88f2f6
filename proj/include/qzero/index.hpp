#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qzero/analysis.hpp"
#include "qzero/corpus.hpp"

namespace qzero {

/// Okapi BM25 parameters.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
    std::uint32_t doc = 0;  ///< ordinal into InvertedIndex::docs(), which is sorted by doc_id
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Per-document data kept by the index.
struct IndexedDoc {
    std::string doc_id;
    std::uint32_t length = 0;  ///< analyzed token count
    std::vector<std::string> categories;

    friend bool operator==(const IndexedDoc&, const IndexedDoc&) = default;
};

/// Immutable term -> postings index with document lengths and categories.
///
/// Documents are stored in ascending doc_id order; posting lists reference
/// them by ordinal and are therefore sorted by doc_id as well.
class InvertedIndex {
public:
    inline static constexpr std::uint32_t kFormatVersion = 1;

    InvertedIndex() = default;

    std::size_t num_docs() const noexcept { return docs_.size(); }
    double avgdl() const noexcept;
    std::uint64_t total_length() const noexcept { return total_length_; }
    const AnalysisConfig& analysis() const noexcept { return analysis_; }
    const Bm25Params& bm25() const noexcept { return bm25_; }

    const std::vector<IndexedDoc>& docs() const noexcept { return docs_; }
    const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const noexcept { return postings_; }

    /// Postings for `term`, empty when the term is not indexed.
    const std::vector<Posting>& postings(std::string_view term) const;

    /// Writes the index into `dir` atomically: data goes to a sibling
    /// temporary directory that replaces `dir` only once fully written.
    void save(const std::filesystem::path& dir) const;

    /// Loads an index directory. When `expected` is given and differs from the
    /// manifest's analysis settings the index refuses to open.
    static InvertedIndex load(const std::filesystem::path& dir,
                              const std::optional<AnalysisConfig>& expected = std::nullopt);

    friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;

private:
    friend class IndexBuilder;

    std::vector<IndexedDoc> docs_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    std::uint64_t total_length_ = 0;
    AnalysisConfig analysis_;
    Bm25Params bm25_;
};

/// Single-writer index construction.
class IndexBuilder {
public:
    explicit IndexBuilder(AnalysisConfig analysis = {}, Bm25Params bm25 = {});

    void add(const Document& doc);

    /// Finalizes the index. Throws Error when no document was added.
    InvertedIndex build() &&;

private:
    struct Pending {
        IndexedDoc doc;
        std::vector<std::pair<std::string, std::uint32_t>> term_freqs;
    };

    AnalysisConfig analysis_;
    Bm25Params bm25_;
    std::vector<Pending> pending_;
};

/// Builds an index from any range of documents.
InvertedIndex build_index(const std::vector<Document>& docs, AnalysisConfig analysis = {}, Bm25Params bm25 = {});

/// Inverse document frequency: ln(1 + (N - df + 0.5) / (df + 0.5)). Always positive.
double bm25_idf(std::size_t df, std::size_t num_docs);

/// BM25 contribution of one term to one document. Throws ContractError when
/// tf < 1, df outside [1, N] or dl < 1.
double bm25_score(std::size_t tf, std::size_t df, std::size_t dl, const InvertedIndex& index, const Bm25Params& params);

/// A retrieval hit. `categories` are the stored categories of the document.
struct RankedArticle {
    std::string doc_id;
    double score = 0.0;
    std::size_t rank = 0;  ///< 1 = best
    std::vector<std::string> categories;

    friend bool operator==(const RankedArticle&, const RankedArticle&) = default;
};

/// Number of articles retrieved per query unless configured otherwise.
inline constexpr std::size_t kDefaultTopK = 50;

/// Top-k documents by summed BM25 over the analyzed query terms. Only
/// documents scoring > 0 are returned; equal scores order by ascending doc_id.
std::vector<RankedArticle> search(const InvertedIndex& index, std::string_view query, std::size_t k,
                                  const Bm25Params& params);

inline std::vector<RankedArticle> search(const InvertedIndex& index, std::string_view query,
                                         std::size_t k = kDefaultTopK) {
    return search(index, query, k, index.bm25());
}

/// Something that ranks corpus articles for a query.
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual std::vector<RankedArticle> retrieve(std::string_view query, std::size_t k) const = 0;
};

class Bm25Retriever final : public Retriever {
public:
    explicit Bm25Retriever(const InvertedIndex& index) : Bm25Retriever(index, index.bm25()) {}
    Bm25Retriever(const InvertedIndex& index, Bm25Params params) : index_(index), params_(params) {}

    std::vector<RankedArticle> retrieve(std::string_view query, std::size_t k) const override {
        return search(index_, query, k, params_);
    }

private:
    const InvertedIndex& index_;
    Bm25Params params_;
};

}  // namespace qzero
