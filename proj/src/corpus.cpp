#include "qzero/corpus.hpp"

#include <nlohmann/json.hpp>

#include "qzero/error.hpp"
#include "qzero/text.hpp"

namespace qzero {

CorpusStats& CorpusStats::operator+=(const CorpusStats& other) noexcept {
    total_read += other.total_read;
    kept += other.kept;
    dropped_short += other.dropped_short;
    dropped_no_category += other.dropped_no_category;
    malformed += other.malformed;
    return *this;
}

std::size_t word_count(std::string_view text) {
    return text::split_whitespace(text).size();
}

std::vector<std::string> normalize_categories(const std::vector<std::string>& raw) {
    static constexpr std::string_view kPrefix = "category:";
    std::vector<std::string> out;
    out.reserve(raw.size());
    for (const auto& category : raw) {
        std::string_view view = text::trim(category);
        if (view.size() >= kPrefix.size()) {
            bool has_prefix = true;
            for (std::size_t i = 0; i < kPrefix.size(); ++i) {
                const char c = view[i];
                const char lower = (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
                if (lower != kPrefix[i]) {
                    has_prefix = false;
                    break;
                }
            }
            if (has_prefix) view = text::trim(view.substr(kPrefix.size()));
        }
        if (!view.empty()) out.emplace_back(view);
    }
    return out;
}

CorpusReader::CorpusReader(std::istream& in, ErrorSink on_error)
    : in_(in), on_error_(std::move(on_error)) {}

std::optional<Document> CorpusReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (text::trim(line).empty()) continue;

        Document doc;
        try {
            const auto record = nlohmann::json::parse(line);
            if (!record.is_object()) throw FormatError("record is not an object");
            const auto id = record.find("id");
            const auto body = record.find("text");
            const auto cats = record.find("categories");
            if (id == record.end() || !id->is_string()) throw FormatError("missing string field 'id'");
            if (body == record.end() || !body->is_string()) throw FormatError("missing string field 'text'");
            if (cats == record.end() || !cats->is_array()) throw FormatError("missing array field 'categories'");
            std::vector<std::string> raw;
            raw.reserve(cats->size());
            for (const auto& c : *cats) {
                if (!c.is_string()) throw FormatError("non-string entry in 'categories'");
                raw.push_back(c.get<std::string>());
            }
            if (const auto title = record.find("title"); title != record.end()) {
                if (!title->is_string()) throw FormatError("field 'title' is not a string");
                doc.title = title->get<std::string>();
            }
            doc.doc_id = id->get<std::string>();
            doc.content = body->get<std::string>();
            doc.categories = normalize_categories(raw);
        } catch (const std::exception& e) {
            ++stats_.malformed;
            RecordError err{line_no_, e.what()};
            if (on_error_) on_error_(err);
            errors_.push_back(std::move(err));
            continue;
        }

        if (auto [it, inserted] = seen_ids_.emplace(doc.doc_id, line_no_); !inserted) {
            throw FormatError("duplicate doc id '" + doc.doc_id + "' (first seen on line " +
                                  std::to_string(it->second) + ")",
                              line_no_);
        }

        ++stats_.total_read;
        if (word_count(doc.content) < kMinDocumentWords) {
            ++stats_.dropped_short;
            continue;
        }
        if (doc.categories.empty()) {
            ++stats_.dropped_no_category;
            continue;
        }
        ++stats_.kept;
        return doc;
    }
    return std::nullopt;
}

std::vector<Document> ingest(std::istream& in, CorpusStats* stats, std::vector<RecordError>* errors) {
    CorpusReader reader(in);
    std::vector<Document> docs;
    while (auto doc = reader.next()) docs.push_back(std::move(*doc));
    if (stats) *stats = reader.stats();
    if (errors) *errors = reader.errors();
    return docs;
}

void write_record(std::ostream& out, const Document& doc) {
    nlohmann::json record = {{"id", doc.doc_id}, {"text", doc.content}, {"categories", doc.categories}};
    if (!doc.title.empty()) record["title"] = doc.title;
    out << record.dump() << '\n';
}

}  // namespace qzero
