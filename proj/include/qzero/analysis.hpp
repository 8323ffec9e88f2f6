#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qzero {

/// Settings of the text analysis chain. Index and query time must agree.
struct AnalysisConfig {
    bool lowercase = true;
    bool remove_stopwords = true;
    bool stem = false;

    friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

void to_json(nlohmann::json& j, const AnalysisConfig& config);
void from_json(const nlohmann::json& j, AnalysisConfig& config);

/// The bundled English stopword list (lowercase).
const std::unordered_set<std::string>& english_stopwords();

/// lowercase -> split on non-alphanumeric -> drop stopwords -> optional Porter stem.
/// Deterministic; used verbatim at index and query time.
std::vector<std::string> analyze(std::string_view text, const AnalysisConfig& config = {});

/// Original Porter (1980) suffix-stripping stemmer. Words that are not
/// plain lowercase ASCII, or shorter than three letters, are returned as is.
std::string porter_stem(std::string_view word);

}  // namespace qzero
