#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qzero {

/// Result of cutting a text to a token budget.
struct Truncation {
    std::string text;
    std::size_t token_count = 0;
};

/// Counts tokens and truncates text to a token budget.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    virtual std::string_view name() const noexcept = 0;
    virtual std::size_t count(std::string_view text) const = 0;

    /// Longest token prefix of `text` whose re-tokenized count is <= budget.
    /// The returned token_count is the tokenizer's count of the returned text.
    virtual Truncation truncate(std::string_view text, std::size_t budget) const = 0;
};

/// Splits on whitespace. Does not match any neural model's token counts.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::string_view name() const noexcept override { return "whitespace"; }
    std::size_t count(std::string_view text) const override;
    Truncation truncate(std::string_view text, std::size_t budget) const override;
};

/// GPT-2 byte-level BPE, loaded from `encoder.json` + `vocab.bpe` (or the
/// equivalent `vocab.json` + `merges.txt`).
class Gpt2Tokenizer final : public Tokenizer {
public:
    Gpt2Tokenizer(const std::filesystem::path& vocab_json, const std::filesystem::path& merges_txt);

    /// Loads from a directory holding either file pair.
    static std::unique_ptr<Gpt2Tokenizer> from_directory(const std::filesystem::path& dir);

    std::string_view name() const noexcept override { return "gpt2-bpe"; }
    std::size_t count(std::string_view text) const override { return encode(text).size(); }
    Truncation truncate(std::string_view text, std::size_t budget) const override;

    std::vector<int> encode(std::string_view text) const;
    std::string decode(std::span<const int> ids) const;

    std::size_t vocab_size() const noexcept { return id_to_token_.size(); }

    /// GPT-2 pre-tokenization: contractions, letter runs, digit runs, other
    /// symbol runs (each optionally led by one space) and whitespace runs.
    static std::vector<std::string_view> pretokenize(std::string_view text);

private:
    std::vector<int> encode_word(std::string_view word) const;

    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> merge_ranks_;
    std::vector<std::string> byte_encoder_;  // byte -> mapped code point, UTF-8 encoded
    std::unordered_map<char32_t, unsigned char> byte_decoder_;

    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::string, std::vector<int>> cache_;
};

}  // namespace qzero
