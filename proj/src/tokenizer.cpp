#include "qzero/tokenizer.hpp"

#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "qzero/error.hpp"
#include "qzero/text.hpp"

namespace qzero {

namespace fs = std::filesystem;

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
    return text::split_whitespace(text).size();
}

Truncation WhitespaceTokenizer::truncate(std::string_view input, std::size_t budget) const {
    const auto words = text::split_whitespace(input);
    if (words.size() <= budget) return {std::string(input), words.size()};
    if (budget == 0) return {};
    const auto& last = words[budget - 1];
    const auto end = static_cast<std::size_t>(last.data() + last.size() - input.data());
    return {std::string(input.substr(0, end)), budget};
}

namespace {

constexpr std::size_t kCacheLimit = 1 << 16;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tokenizer file " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Gpt2Tokenizer::Gpt2Tokenizer(const fs::path& vocab_json, const fs::path& merges_txt) {
    // Printable bytes map to themselves; the rest are shifted above U+00FF.
    byte_encoder_.resize(256);
    int shift = 0;
    for (int b = 0; b < 256; ++b) {
        const bool printable = (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
        const char32_t cp = printable ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + shift++);
        text::append_utf8(byte_encoder_[b], cp);
        byte_decoder_[cp] = static_cast<unsigned char>(b);
    }

    nlohmann::json vocab;
    try {
        vocab = nlohmann::json::parse(read_file(vocab_json));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid tokenizer vocabulary " + vocab_json.string() + ": " + e.what());
    }
    if (!vocab.is_object() || vocab.empty()) throw FormatError("tokenizer vocabulary must be a non-empty object");
    int max_id = -1;
    for (const auto& [token, id] : vocab.items()) {
        if (!id.is_number_integer() || id.get<int>() < 0) throw FormatError("bad id for vocabulary entry " + token);
        token_to_id_.emplace(token, id.get<int>());
        max_id = std::max(max_id, id.get<int>());
    }
    id_to_token_.resize(static_cast<std::size_t>(max_id) + 1);
    for (const auto& [token, id] : token_to_id_) id_to_token_[id] = token;

    std::ifstream merges(merges_txt);
    if (!merges) throw IoError("cannot open tokenizer merges " + merges_txt.string());
    std::string line;
    std::size_t line_no = 0;
    int rank = 0;
    while (std::getline(merges, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line.starts_with("#version"))) continue;
        const auto parts = text::split_whitespace(line);
        if (parts.size() != 2) throw FormatError("merge rule must have two symbols", line_no);
        merge_ranks_.emplace(std::string(parts[0]) + ' ' + std::string(parts[1]), rank++);
    }
}

std::unique_ptr<Gpt2Tokenizer> Gpt2Tokenizer::from_directory(const fs::path& dir) {
    if (fs::exists(dir / "encoder.json") && fs::exists(dir / "vocab.bpe")) {
        return std::make_unique<Gpt2Tokenizer>(dir / "encoder.json", dir / "vocab.bpe");
    }
    if (fs::exists(dir / "vocab.json") && fs::exists(dir / "merges.txt")) {
        return std::make_unique<Gpt2Tokenizer>(dir / "vocab.json", dir / "merges.txt");
    }
    throw IoError("no GPT-2 tokenizer files (encoder.json + vocab.bpe or vocab.json + merges.txt) in " +
                  dir.string());
}

std::vector<std::string_view> Gpt2Tokenizer::pretokenize(std::string_view s) {
    enum class Kind { Letter, Number, Space, Other };
    const auto kind_of = [](char32_t cp) {
        if (text::is_space(cp)) return Kind::Space;
        if (text::is_letter(cp)) return Kind::Letter;
        if (text::is_number(cp)) return Kind::Number;
        return Kind::Other;
    };
    // Length of the run of `kind` starting at `pos`.
    const auto run_end = [&](std::size_t pos, Kind kind) {
        while (pos < s.size()) {
            std::size_t next = pos;
            if (kind_of(text::decode_next(s, next)) != kind) break;
            pos = next;
        }
        return pos;
    };

    std::vector<std::string_view> pieces;
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (s[pos] == '\'') {
            std::size_t len = 0;
            for (const std::string_view c : {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"}) {
                if (s.substr(pos, c.size()) == c) {
                    len = c.size();
                    break;
                }
            }
            if (len) {
                pieces.push_back(s.substr(pos, len));
                pos += len;
                continue;
            }
        }

        std::size_t start = pos;
        std::size_t body = pos;
        if (s[pos] == ' ' && pos + 1 < s.size()) body = pos + 1;
        std::size_t after = body;
        const Kind body_kind = kind_of(text::decode_next(s, after));
        if (body_kind != Kind::Space) {
            const std::size_t end = run_end(body, body_kind);
            pieces.push_back(s.substr(start, end - start));
            pos = end;
            continue;
        }

        // Whitespace: a run not followed by non-space is taken whole; a run
        // followed by a word leaves its last space for that word.
        const std::size_t end = run_end(pos, Kind::Space);
        if (end < s.size()) {
            std::size_t last = end - 1;
            while ((static_cast<unsigned char>(s[last]) & 0xC0) == 0x80) --last;
            if (last > pos) {
                pieces.push_back(s.substr(pos, last - pos));
                pos = last;
                continue;
            }
        }
        pieces.push_back(s.substr(pos, end - pos));
        pos = end;
    }
    return pieces;
}

std::vector<int> Gpt2Tokenizer::encode_word(std::string_view word) const {
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(std::string(word)); it != cache_.end()) return it->second;
    }

    std::vector<std::string> symbols;
    symbols.reserve(word.size());
    for (const char c : word) symbols.push_back(byte_encoder_[static_cast<unsigned char>(c)]);

    while (symbols.size() > 1) {
        int best_rank = std::numeric_limits<int>::max();
        std::size_t best = 0;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            const auto it = merge_ranks_.find(symbols[i] + ' ' + symbols[i + 1]);
            if (it != merge_ranks_.end() && it->second < best_rank) {
                best_rank = it->second;
                best = i;
            }
        }
        if (best_rank == std::numeric_limits<int>::max()) break;
        const std::string first = symbols[best];
        const std::string second = symbols[best + 1];
        std::vector<std::string> merged;
        merged.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size();) {
            if (i + 1 < symbols.size() && symbols[i] == first && symbols[i + 1] == second) {
                merged.push_back(first + second);
                i += 2;
            } else {
                merged.push_back(std::move(symbols[i]));
                ++i;
            }
        }
        symbols = std::move(merged);
    }

    std::vector<int> ids;
    ids.reserve(symbols.size());
    for (const auto& sym : symbols) {
        const auto it = token_to_id_.find(sym);
        if (it == token_to_id_.end()) throw FormatError("tokenizer vocabulary lacks symbol '" + sym + "'");
        ids.push_back(it->second);
    }

    std::lock_guard lock(cache_mutex_);
    if (cache_.size() >= kCacheLimit) cache_.clear();
    cache_.emplace(word, ids);
    return ids;
}

std::vector<int> Gpt2Tokenizer::encode(std::string_view input) const {
    std::vector<int> ids;
    for (const auto piece : pretokenize(input)) {
        const auto word_ids = encode_word(piece);
        ids.insert(ids.end(), word_ids.begin(), word_ids.end());
    }
    return ids;
}

std::string Gpt2Tokenizer::decode(std::span<const int> ids) const {
    std::string out;
    for (const int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
            throw ContractError("token id " + std::to_string(id) + " outside the vocabulary");
        }
        const std::string& token = id_to_token_[id];
        for (std::size_t pos = 0; pos < token.size();) {
            const char32_t cp = text::decode_next(token, pos);
            const auto it = byte_decoder_.find(cp);
            if (it == byte_decoder_.end()) throw FormatError("vocabulary token outside the byte alphabet");
            out.push_back(static_cast<char>(it->second));
        }
    }
    return out;
}

Truncation Gpt2Tokenizer::truncate(std::string_view input, std::size_t budget) const {
    const auto ids = encode(input);
    if (ids.size() <= budget) return {std::string(input), ids.size()};
    // Decoding a token prefix can split a UTF-8 sequence or a BPE word, so the
    // prefix is re-counted and shortened until it fits.
    for (std::size_t n = budget; n > 0; --n) {
        std::string prefix = decode(std::span(ids).first(n));
        prefix.resize(text::complete_utf8_prefix(prefix));
        const std::size_t c = count(prefix);
        if (c <= budget) return {std::move(prefix), c};
    }
    return {};
}

}  // namespace qzero
