#include "qzero/index.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qzero/error.hpp"

namespace qzero {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kDocsMagic = {'Q', 'Z', 'D', 'X'};
constexpr std::array<char, 4> kPostingsMagic = {'Q', 'Z', 'P', 'X'};
constexpr std::string_view kManifestName = "manifest.json";
constexpr std::string_view kDocsName = "docs.bin";
constexpr std::string_view kPostingsName = "postings.bin";

// Little-endian fixed-width encoding, independent of the host byte order.
class BinaryWriter {
public:
    explicit BinaryWriter(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot create " + path.string());
    }

    void magic(const std::array<char, 4>& m) { out_.write(m.data(), m.size()); }

    void u32(std::uint32_t v) {
        std::array<char, 4> b{};
        for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(b.data(), b.size());
    }

    void u64(std::uint64_t v) {
        std::array<char, 8> b{};
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(b.data(), b.size());
    }

    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    void close() {
        out_.flush();
        out_.close();
        if (!out_) throw IoError("failed writing " + path_.string());
    }

private:
    fs::path path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open " + path.string());
    }

    void magic(const std::array<char, 4>& expected) {
        std::array<char, 4> m{};
        read(m.data(), m.size());
        if (m != expected) fail("bad magic");
    }

    std::uint32_t u32() {
        std::array<unsigned char, 4> b{};
        read(reinterpret_cast<char*>(b.data()), b.size());
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    std::uint64_t u64() {
        std::array<unsigned char, 8> b{};
        read(reinterpret_cast<char*>(b.data()), b.size());
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    std::string str() {
        const std::uint32_t len = u32();
        std::string s(len, '\0');
        read(s.data(), len);
        return s;
    }

    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes");
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw FormatError("corrupt index file " + path_.string() + ": " + why);
    }

private:
    void read(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) fail("unexpected end of file");
    }

    fs::path path_;
    std::ifstream in_;
};

double term_weight(double tf, double idf, double dl, double avgdl, const Bm25Params& p) {
    const double norm = p.k1 * (1.0 - p.b + p.b * dl / avgdl);
    return idf * tf * (p.k1 + 1.0) / (tf + norm);
}

const std::vector<Posting> kNoPostings;

}  // namespace

double InvertedIndex::avgdl() const noexcept {
    return docs_.empty() ? 0.0 : static_cast<double>(total_length_) / static_cast<double>(docs_.size());
}

const std::vector<Posting>& InvertedIndex::postings(std::string_view term) const {
    const auto it = postings_.find(term);
    return it == postings_.end() ? kNoPostings : it->second;
}

void InvertedIndex::save(const fs::path& dir) const {
    if (docs_.empty()) throw ContractError("refusing to save an empty index");
    const fs::path target = dir.lexically_normal();
    fs::path parent = target.parent_path();
    if (parent.empty()) parent = ".";
    const std::string suffix = "." + std::to_string(::getpid());
    const fs::path tmp = parent / (target.filename().string() + ".tmp" + suffix);

    try {
        fs::create_directories(parent);
        fs::remove_all(tmp);
        fs::create_directory(tmp);

        BinaryWriter docs(tmp / kDocsName);
        docs.magic(kDocsMagic);
        docs.u32(kFormatVersion);
        docs.u64(docs_.size());
        for (const auto& d : docs_) {
            docs.str(d.doc_id);
            docs.u32(d.length);
            docs.u32(static_cast<std::uint32_t>(d.categories.size()));
            for (const auto& c : d.categories) docs.str(c);
        }
        docs.close();

        BinaryWriter post(tmp / kPostingsName);
        post.magic(kPostingsMagic);
        post.u32(kFormatVersion);
        post.u64(postings_.size());
        for (const auto& [term, list] : postings_) {
            post.str(term);
            post.u32(static_cast<std::uint32_t>(list.size()));
            for (const auto& p : list) {
                post.u32(p.doc);
                post.u32(p.tf);
            }
        }
        post.close();

        const nlohmann::json manifest = {
            {"format", "qzero-bm25-index"},
            {"version", kFormatVersion},
            {"num_docs", docs_.size()},
            {"num_terms", postings_.size()},
            {"total_length", total_length_},
            {"avgdl", avgdl()},
            {"analysis", analysis_},
            {"bm25", {{"k1", bm25_.k1}, {"b", bm25_.b}}},
            {"files", {kDocsName, kPostingsName}},
        };
        std::ofstream out(tmp / kManifestName, std::ios::trunc);
        out << manifest.dump(2) << '\n';
        out.close();
        if (!out) throw IoError("failed writing manifest");

        if (fs::exists(target)) {
            const fs::path old = parent / (target.filename().string() + ".old" + suffix);
            fs::remove_all(old);
            fs::rename(target, old);
            fs::rename(tmp, target);
            fs::remove_all(old);
        } else {
            fs::rename(tmp, target);
        }
    } catch (const fs::filesystem_error& e) {
        std::error_code ignored;
        fs::remove_all(tmp, ignored);
        throw IoError(std::string("saving index failed: ") + e.what());
    } catch (...) {
        std::error_code ignored;
        fs::remove_all(tmp, ignored);
        throw;
    }
}

InvertedIndex InvertedIndex::load(const fs::path& dir, const std::optional<AnalysisConfig>& expected) {
    std::ifstream manifest_in(dir / kManifestName);
    if (!manifest_in) throw IoError("no index manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("unreadable index manifest: ") + e.what());
    }

    InvertedIndex index;
    std::uint64_t num_docs = 0;
    std::uint64_t num_terms = 0;
    try {
        if (manifest.at("format") != "qzero-bm25-index") throw FormatError("not a qzero index");
        if (manifest.at("version").get<std::uint32_t>() != kFormatVersion) {
            throw FormatError("unsupported index version " + manifest.at("version").dump());
        }
        num_docs = manifest.at("num_docs").get<std::uint64_t>();
        num_terms = manifest.at("num_terms").get<std::uint64_t>();
        index.total_length_ = manifest.at("total_length").get<std::uint64_t>();
        index.analysis_ = manifest.at("analysis").get<AnalysisConfig>();
        index.bm25_.k1 = manifest.at("bm25").at("k1").get<double>();
        index.bm25_.b = manifest.at("bm25").at("b").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid index manifest: ") + e.what());
    }
    if (expected && *expected != index.analysis_) {
        throw ContractError("analysis settings " + nlohmann::json(*expected).dump() +
                            " do not match the index manifest " + nlohmann::json(index.analysis_).dump());
    }

    BinaryReader docs(dir / kDocsName);
    docs.magic(kDocsMagic);
    if (docs.u32() != kFormatVersion) docs.fail("version mismatch");
    if (docs.u64() != num_docs) docs.fail("document count disagrees with manifest");
    index.docs_.resize(num_docs);
    std::uint64_t total = 0;
    for (auto& d : index.docs_) {
        d.doc_id = docs.str();
        d.length = docs.u32();
        d.categories.resize(docs.u32());
        for (auto& c : d.categories) c = docs.str();
        total += d.length;
    }
    docs.expect_end();
    if (total != index.total_length_) docs.fail("document lengths disagree with manifest");
    for (std::size_t i = 1; i < index.docs_.size(); ++i) {
        if (!(index.docs_[i - 1].doc_id < index.docs_[i].doc_id)) docs.fail("documents not sorted by id");
    }

    BinaryReader post(dir / kPostingsName);
    post.magic(kPostingsMagic);
    if (post.u32() != kFormatVersion) post.fail("version mismatch");
    if (post.u64() != num_terms) post.fail("term count disagrees with manifest");
    for (std::uint64_t t = 0; t < num_terms; ++t) {
        std::string term = post.str();
        std::vector<Posting> list(post.u32());
        for (auto& p : list) {
            p.doc = post.u32();
            p.tf = post.u32();
            if (p.doc >= num_docs || p.tf == 0) post.fail("invalid posting for term '" + term + "'");
        }
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (list[i - 1].doc >= list[i].doc) post.fail("postings not sorted for term '" + term + "'");
        }
        index.postings_.emplace_hint(index.postings_.end(), std::move(term), std::move(list));
    }
    post.expect_end();
    return index;
}

IndexBuilder::IndexBuilder(AnalysisConfig analysis, Bm25Params bm25) : analysis_(analysis), bm25_(bm25) {}

void IndexBuilder::add(const Document& doc) {
    Pending p;
    p.doc.doc_id = doc.doc_id;
    p.doc.categories = doc.categories;
    std::map<std::string, std::uint32_t> counts;
    for (auto& token : analyze(doc.content, analysis_)) {
        ++counts[std::move(token)];
        ++p.doc.length;
    }
    p.term_freqs.assign(counts.begin(), counts.end());
    pending_.push_back(std::move(p));
}

InvertedIndex IndexBuilder::build() && {
    if (pending_.empty()) throw Error("cannot build an index from an empty corpus");
    std::sort(pending_.begin(), pending_.end(),
              [](const Pending& a, const Pending& b) { return a.doc.doc_id < b.doc.doc_id; });
    for (std::size_t i = 1; i < pending_.size(); ++i) {
        if (pending_[i - 1].doc.doc_id == pending_[i].doc.doc_id) {
            throw ContractError("duplicate doc id '" + pending_[i].doc.doc_id + "'");
        }
    }

    InvertedIndex index;
    index.analysis_ = analysis_;
    index.bm25_ = bm25_;
    index.docs_.reserve(pending_.size());
    for (std::uint32_t ord = 0; ord < pending_.size(); ++ord) {
        auto& p = pending_[ord];
        index.total_length_ += p.doc.length;
        for (auto& [term, tf] : p.term_freqs) index.postings_[term].push_back({ord, tf});
        index.docs_.push_back(std::move(p.doc));
    }
    pending_.clear();
    return index;
}

InvertedIndex build_index(const std::vector<Document>& docs, AnalysisConfig analysis, Bm25Params bm25) {
    IndexBuilder builder(analysis, bm25);
    for (const auto& d : docs) builder.add(d);
    return std::move(builder).build();
}

double bm25_idf(std::size_t df, std::size_t num_docs) {
    const double n = static_cast<double>(num_docs);
    const double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double bm25_score(std::size_t tf, std::size_t df, std::size_t dl, const InvertedIndex& index,
                  const Bm25Params& params) {
    if (tf < 1) throw ContractError("bm25_score: tf must be >= 1");
    if (df < 1 || df > index.num_docs()) throw ContractError("bm25_score: df must lie in [1, N]");
    if (dl < 1) throw ContractError("bm25_score: dl must be >= 1");
    return term_weight(static_cast<double>(tf), bm25_idf(df, index.num_docs()), static_cast<double>(dl),
                       index.avgdl(), params);
}

std::vector<RankedArticle> search(const InvertedIndex& index, std::string_view query, std::size_t k,
                                  const Bm25Params& params) {
    if (k < 1) throw ContractError("search: k must be >= 1");

    std::map<std::string, std::size_t> query_tf;
    for (auto& token : analyze(query, index.analysis())) ++query_tf[std::move(token)];

    const double avgdl = index.avgdl();
    const auto& docs = index.docs();
    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& [term, qtf] : query_tf) {
        const auto& list = index.postings(term);
        if (list.empty()) continue;
        const double idf = bm25_idf(list.size(), index.num_docs());
        for (const auto& p : list) {
            acc[p.doc] += static_cast<double>(qtf) *
                          term_weight(p.tf, idf, static_cast<double>(docs[p.doc].length), avgdl, params);
        }
    }

    std::vector<std::pair<double, std::uint32_t>> hits;
    hits.reserve(acc.size());
    for (const auto& [doc, score] : acc) {
        if (score > 0.0) hits.emplace_back(score, doc);
    }
    const auto better = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);

    std::vector<RankedArticle> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = docs[hits[i].second];
        out.push_back({d.doc_id, hits[i].first, i + 1, d.categories});
    }
    return out;
}

}  // namespace qzero
