#include "qzero/analysis.hpp"

#include <array>
#include <utility>

#include <nlohmann/json.hpp>

#include "qzero/text.hpp"

namespace qzero {

void to_json(nlohmann::json& j, const AnalysisConfig& config) {
    j = nlohmann::json{{"lowercase", config.lowercase},
                       {"remove_stopwords", config.remove_stopwords},
                       {"stem", config.stem}};
}

void from_json(const nlohmann::json& j, AnalysisConfig& config) {
    j.at("lowercase").get_to(config.lowercase);
    j.at("remove_stopwords").get_to(config.remove_stopwords);
    j.at("stem").get_to(config.stem);
}

const std::unordered_set<std::string>& english_stopwords() {
    static const std::unordered_set<std::string> kWords = {
        "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
        "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
        "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing",
        "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "has",
        "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him",
        "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
        "just", "ll", "m", "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn",
        "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or", "other", "our",
        "ours", "ourselves", "out", "over", "own", "re", "s", "same", "shan", "she", "should",
        "shouldn", "so", "some", "such", "t", "than", "that", "the", "their", "theirs", "them",
        "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
        "under", "until", "up", "ve", "very", "was", "wasn", "we", "were", "weren", "what", "when",
        "where", "which", "while", "who", "whom", "why", "will", "with", "won", "wouldn", "y",
        "you", "your", "yours", "yourself", "yourselves",
    };
    return kWords;
}

std::vector<std::string> analyze(std::string_view input, const AnalysisConfig& config) {
    std::vector<std::string> tokens;
    const auto& stopwords = english_stopwords();
    for (const auto piece : text::split_alnum(input)) {
        std::string token = config.lowercase ? text::to_lower(piece) : std::string(piece);
        if (config.remove_stopwords && stopwords.contains(config.lowercase ? token : text::to_lower(token))) {
            continue;
        }
        if (config.stem) token = porter_stem(token);
        tokens.push_back(std::move(token));
    }
    return tokens;
}

namespace {

// Working state for one Porter run: the word and the length of the stem
// under consideration (everything before the candidate suffix).
class PorterWord {
public:
    explicit PorterWord(std::string_view w) : w_(w) {}

    std::string take() && { return std::move(w_); }

    bool ends_with(std::string_view suffix) const {
        return w_.size() >= suffix.size() && std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
    }

    // Measure m of w_[0, len).
    int measure(std::size_t len) const {
        int m = 0;
        std::size_t i = 0;
        while (i < len && consonant(i)) ++i;
        while (i < len) {
            while (i < len && !consonant(i)) ++i;
            if (i >= len) break;
            while (i < len && consonant(i)) ++i;
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i) {
            if (!consonant(i)) return true;
        }
        return false;
    }

    bool ends_double_consonant(std::size_t len) const {
        return len >= 2 && w_[len - 1] == w_[len - 2] && consonant(len - 1);
    }

    // *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
    bool ends_cvc(std::size_t len) const {
        if (len < 3) return false;
        if (!consonant(len - 3) || consonant(len - 2) || !consonant(len - 1)) return false;
        const char c = w_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    std::size_t size() const { return w_.size(); }
    char back() const { return w_.back(); }
    char at(std::size_t i) const { return w_[i]; }

    void replace_suffix(std::size_t suffix_len, std::string_view with) {
        w_.resize(w_.size() - suffix_len);
        w_.append(with);
    }

private:
    bool consonant(std::size_t i) const {
        switch (w_[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 || !consonant(i - 1);
        default:
            return true;
        }
    }

    std::string w_;
};

using Rule = std::pair<std::string_view, std::string_view>;

// Applies the longest matching rule if the remaining stem has measure > min_m.
// Once a suffix matches, no shorter rule is tried.
template <std::size_t N>
void apply_rules(PorterWord& w, const std::array<Rule, N>& rules, int min_m) {
    const Rule* best = nullptr;
    for (const auto& rule : rules) {
        if (w.ends_with(rule.first) && (!best || rule.first.size() > best->first.size())) best = &rule;
    }
    if (!best) return;
    const std::size_t stem_len = w.size() - best->first.size();
    if (w.measure(stem_len) > min_m) w.replace_suffix(best->first.size(), best->second);
}

void step1a(PorterWord& w) {
    if (w.ends_with("sses")) w.replace_suffix(4, "ss");
    else if (w.ends_with("ies")) w.replace_suffix(3, "i");
    else if (w.ends_with("ss")) return;
    else if (w.ends_with("s")) w.replace_suffix(1, "");
}

void step1b(PorterWord& w) {
    if (w.ends_with("eed")) {
        if (w.measure(w.size() - 3) > 0) w.replace_suffix(3, "ee");
        return;
    }
    std::size_t cut = 0;
    if (w.ends_with("ed") && w.has_vowel(w.size() - 2)) cut = 2;
    else if (w.ends_with("ing") && w.has_vowel(w.size() - 3)) cut = 3;
    if (cut == 0) return;
    w.replace_suffix(cut, "");

    if (w.ends_with("at")) w.replace_suffix(2, "ate");
    else if (w.ends_with("bl")) w.replace_suffix(2, "ble");
    else if (w.ends_with("iz")) w.replace_suffix(2, "ize");
    else if (w.ends_double_consonant(w.size())) {
        const char c = w.back();
        if (c != 'l' && c != 's' && c != 'z') w.replace_suffix(1, "");
    } else if (w.measure(w.size()) == 1 && w.ends_cvc(w.size())) {
        w.replace_suffix(0, "e");
    }
}

void step1c(PorterWord& w) {
    if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace_suffix(1, "i");
}

void step2(PorterWord& w) {
    static constexpr std::array<Rule, 20> kRules = {{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"}, {"abli", "able"}, {"alli", "al"}, {"entli", "ent"},
        {"eli", "e"}, {"ousli", "ous"}, {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"}, {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"},
    }};
    apply_rules(w, kRules, 0);
}

void step3(PorterWord& w) {
    static constexpr std::array<Rule, 7> kRules = {{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"}, {"ful", ""}, {"ness", ""},
    }};
    apply_rules(w, kRules, 0);
}

void step4(PorterWord& w) {
    static constexpr std::array<std::string_view, 19> kSuffixes = {
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
        "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    };
    std::string_view best;
    for (const auto suffix : kSuffixes) {
        if (w.ends_with(suffix) && suffix.size() > best.size()) best = suffix;
    }
    if (best.empty()) return;
    const std::size_t stem_len = w.size() - best.size();
    if (w.measure(stem_len) <= 1) return;
    if (best == "ion") {
        if (stem_len == 0) return;
        const char c = w.at(stem_len - 1);
        if (c != 's' && c != 't') return;
    }
    w.replace_suffix(best.size(), "");
}

void step5(PorterWord& w) {
    if (w.ends_with("e")) {
        const int m = w.measure(w.size() - 1);
        if (m > 1 || (m == 1 && !w.ends_cvc(w.size() - 1))) w.replace_suffix(1, "");
    }
    if (w.measure(w.size()) > 1 && w.ends_double_consonant(w.size()) && w.back() == 'l') {
        w.replace_suffix(1, "");
    }
}

}  // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() < 3) return std::string(word);
    for (const char c : word) {
        if (c < 'a' || c > 'z') return std::string(word);
    }
    PorterWord w(word);
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5(w);
    return std::move(w).take();
}

}  // namespace qzero
