#include "qzero/text.hpp"

namespace qzero::text {

char32_t decode_next(std::string_view s, std::size_t& pos) noexcept {
    const auto lead = static_cast<unsigned char>(s[pos]);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        ++pos;
        return kReplacementChar;
    }
    if (pos + len > s.size()) {
        ++pos;
        return kReplacementChar;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto cont = static_cast<unsigned char>(s[pos + i]);
        if ((cont & 0xC0) != 0x80) {
            ++pos;
            return kReplacementChar;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    // Overlong encodings and surrogates are malformed.
    static constexpr char32_t kMinForLen[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kReplacementChar;
    }
    pos += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char32_t cp) noexcept {
    switch (cp) {
    case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_number(char32_t cp) noexcept {
    if (cp < 0x80) return cp >= '0' && cp <= '9';
    switch (cp) {
    case 0xB2: case 0xB3: case 0xB9: case 0xBC: case 0xBD: case 0xBE: case 0x2070:
        return true;
    default:
        break;
    }
    return (cp >= 0x0660 && cp <= 0x0669) || (cp >= 0x06F0 && cp <= 0x06F9) ||
           (cp >= 0x0966 && cp <= 0x096F) || (cp >= 0x2074 && cp <= 0x2079) ||
           (cp >= 0x2080 && cp <= 0x2089) || (cp >= 0x2150 && cp <= 0x2189) ||
           (cp >= 0x2460 && cp <= 0x249B) || (cp >= 0xFF10 && cp <= 0xFF19);
}

namespace {

bool is_separator_block(char32_t cp) noexcept {
    if (cp >= 0x80 && cp <= 0xBF) {
        // Latin-1 punctuation and symbols; ª µ º are letters, the rest of the
        // digits in this block are handled by is_number.
        return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
    }
    if (cp == 0xD7 || cp == 0xF7) return true;
    return (cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) ||
           (cp >= 0xE000 && cp <= 0xF8FF) || (cp >= 0xFE30 && cp <= 0xFE4F) ||
           (cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
           (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65) ||
           (cp >= 0xFFF0 && cp <= 0xFFFF) || (cp >= 0x1F000 && cp <= 0x1FAFF);
}

}  // namespace

bool is_letter(char32_t cp) noexcept {
    if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    if (is_number(cp) || is_space(cp) || is_separator_block(cp)) return false;
    // Combining marks are not letters on their own but never split words.
    return true;
}

char32_t to_lower(char32_t cp) noexcept {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x100 && cp <= 0x17F) {
        if (cp == 0x130) return U'i';
        if (cp == 0x178) return 0xFF;
        const bool odd_pairs = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
        if (odd_pairs) return (cp % 2 == 1) ? cp + 1 : cp;
        if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp == 0x386) return 0x3AC;
    if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
    if (cp == 0x38C) return 0x3CC;
    if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

bool is_upper(char32_t cp) noexcept {
    return to_lower(cp) != cp;
}

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) {
        const std::size_t start = pos;
        const char32_t cp = decode_next(s, pos);
        const char32_t lower = to_lower(cp);
        if (lower == cp) {
            out.append(s.substr(start, pos - start));
        } else {
            append_utf8(out, lower);
        }
    }
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end) {
        std::size_t pos = begin;
        if (!is_space(decode_next(s, pos))) break;
        begin = pos;
    }
    while (end > begin) {
        // Step back to the start of the previous code point.
        std::size_t start = end - 1;
        while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
        std::size_t pos = start;
        if (!is_space(decode_next(s, pos)) || pos != end) break;
        end = start;
    }
    return s.substr(begin, end - begin);
}

namespace {

template <typename Pred>
std::vector<std::string_view> split_runs(std::string_view s, Pred keep) {
    std::vector<std::string_view> out;
    std::size_t run_start = std::string_view::npos;
    for (std::size_t pos = 0; pos < s.size();) {
        const std::size_t start = pos;
        const char32_t cp = decode_next(s, pos);
        if (keep(cp)) {
            if (run_start == std::string_view::npos) run_start = start;
        } else if (run_start != std::string_view::npos) {
            out.push_back(s.substr(run_start, start - run_start));
            run_start = std::string_view::npos;
        }
    }
    if (run_start != std::string_view::npos) out.push_back(s.substr(run_start));
    return out;
}

}  // namespace

std::vector<std::string_view> split_whitespace(std::string_view s) {
    return split_runs(s, [](char32_t cp) { return !is_space(cp); });
}

std::vector<std::string_view> split_alnum(std::string_view s) {
    return split_runs(s, [](char32_t cp) { return is_alnum(cp); });
}

bool is_punctuation_only(std::string_view s) noexcept {
    if (s.empty()) return false;
    for (std::size_t pos = 0; pos < s.size();) {
        if (is_alnum(decode_next(s, pos))) return false;
    }
    return true;
}

std::size_t complete_utf8_prefix(std::string_view s) noexcept {
    // Look back at most three bytes for an unfinished lead byte.
    for (std::size_t back = 1; back <= 4 && back <= s.size(); ++back) {
        const auto c = static_cast<unsigned char>(s[s.size() - back]);
        if ((c & 0xC0) == 0x80) continue;
        std::size_t need = 1;
        if ((c & 0xE0) == 0xC0) need = 2;
        else if ((c & 0xF0) == 0xE0) need = 3;
        else if ((c & 0xF8) == 0xF0) need = 4;
        return need > back ? s.size() - back : s.size();
    }
    return s.size();
}

}  // namespace qzero::text
