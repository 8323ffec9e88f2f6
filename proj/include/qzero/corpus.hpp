#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qzero {

/// One knowledge-corpus article.
struct Document {
    std::string doc_id;
    std::string title;
    std::string content;
    std::vector<std::string> categories;

    friend bool operator==(const Document&, const Document&) = default;
};

struct CorpusStats {
    std::size_t total_read = 0;
    std::size_t kept = 0;
    std::size_t dropped_short = 0;
    std::size_t dropped_no_category = 0;
    /// Lines that could not be parsed. Not part of total_read.
    std::size_t malformed = 0;

    CorpusStats& operator+=(const CorpusStats& other) noexcept;
    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Record-level problem reported while ingesting; processing continues.
struct RecordError {
    std::size_t line = 0;
    std::string message;
};

/// Minimum content length, in words, for an article to be kept.
inline constexpr std::size_t kMinDocumentWords = 20;

/// Number of maximal non-whitespace runs in `text`.
std::size_t word_count(std::string_view text);

/// Trims, strips a case-insensitive "Category:" prefix and drops empty entries.
/// Order and duplicates are preserved.
std::vector<std::string> normalize_categories(const std::vector<std::string>& raw);

/// Streaming reader over a line-delimited JSON corpus.
///
/// Only documents passing both filters (>= kMinDocumentWords words, >= 1
/// category after normalization) are yielded. Memory use is bounded by the
/// set of doc ids seen so far, which is needed to reject duplicates.
class CorpusReader {
public:
    using ErrorSink = std::function<void(const RecordError&)>;

    explicit CorpusReader(std::istream& in, ErrorSink on_error = {});

    /// Next kept document, or nullopt at end of stream.
    /// Throws FormatError when a doc_id repeats.
    std::optional<Document> next();

    const CorpusStats& stats() const noexcept { return stats_; }
    const std::vector<RecordError>& errors() const noexcept { return errors_; }

private:
    std::istream& in_;
    ErrorSink on_error_;
    CorpusStats stats_;
    std::vector<RecordError> errors_;
    std::unordered_map<std::string, std::size_t> seen_ids_;
    std::size_t line_no_ = 0;
};

/// Reads a whole stream. Convenience for small corpora and tests.
std::vector<Document> ingest(std::istream& in, CorpusStats* stats = nullptr,
                             std::vector<RecordError>* errors = nullptr);

/// Writes one document as a corpus record line (the inverse of the reader).
void write_record(std::ostream& out, const Document& doc);

}  // namespace qzero
