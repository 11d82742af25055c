#pragma once

// Minimal UTF-8 / codepoint utilities for the scripts this toolkit handles:
// the Kannada block (U+0C80..U+0CFF) and Latin text with the diacritics used
// by the romanization schemes (macron vowels, underdot retroflexes, etc.).
// Not a general Unicode library.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tulu::uni {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes UTF-8; malformed bytes become U+FFFD and decoding continues.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        char32_t cp = kReplacement;
        size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < s.size()) {
            unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            if ((c1 & 0xC0) == 0x80) {
                cp = (char32_t(c & 0x1F) << 6) | (c1 & 0x3F);
                len = 2;
                if (cp < 0x80) cp = kReplacement;
            }
        } else if ((c & 0xF0) == 0xE0 && i + 2 < s.size()) {
            unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
            if ((c1 & 0xC0) == 0x80 && (c2 & 0xC0) == 0x80) {
                cp = (char32_t(c & 0x0F) << 12) | (char32_t(c1 & 0x3F) << 6) | (c2 & 0x3F);
                len = 3;
                if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacement;
            }
        } else if ((c & 0xF8) == 0xF0 && i + 3 < s.size()) {
            unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
            unsigned char c3 = static_cast<unsigned char>(s[i + 3]);
            if ((c1 & 0xC0) == 0x80 && (c2 & 0xC0) == 0x80 && (c3 & 0xC0) == 0x80) {
                cp = (char32_t(c & 0x07) << 18) | (char32_t(c1 & 0x3F) << 12) |
                     (char32_t(c2 & 0x3F) << 6) | (c3 & 0x3F);
                len = 4;
                if (cp < 0x10000 || cp > 0x10FFFF) cp = kReplacement;
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

inline std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size() * 2);
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

inline std::string encode_utf8(char32_t cp) {
    std::string out;
    append_utf8(out, cp);
    return out;
}

// Canonical composition limited to the combining sequences that occur in the
// shipped schemes: Latin base + {macron, dot below, dot above, tilde, acute,
// line below} and the Kannada two-part vowel signs. Combining candrabindu
// (U+0310) has no precomposed form and is left as a sequence.
inline char32_t compose_pair(char32_t base, char32_t mark) {
    switch (mark) {
        case 0x0304:  // macron
            switch (base) {
                case U'a': return 0x0101; case U'i': return 0x012B;
                case U'u': return 0x016B; case U'e': return 0x0113;
                case U'o': return 0x014D;
                case U'A': return 0x0100; case U'I': return 0x012A;
                case U'U': return 0x016A; case U'E': return 0x0112;
                case U'O': return 0x014C;
            }
            break;
        case 0x0323:  // dot below
            switch (base) {
                case U'l': return 0x1E37; case U'n': return 0x1E47;
                case U't': return 0x1E6D; case U'd': return 0x1E0D;
                case U'm': return 0x1E43; case U'h': return 0x1E25;
                case U's': return 0x1E63; case U'r': return 0x1E5B;
                case U'L': return 0x1E36; case U'N': return 0x1E46;
                case U'T': return 0x1E6C; case U'D': return 0x1E0C;
                case U'M': return 0x1E42; case U'H': return 0x1E24;
                case U'S': return 0x1E62; case U'R': return 0x1E5A;
            }
            break;
        case 0x0307:  // dot above
            if (base == U'n') return 0x1E45;
            if (base == U'N') return 0x1E44;
            break;
        case 0x0303:  // tilde
            if (base == U'n') return 0x00F1;
            if (base == U'N') return 0x00D1;
            break;
        case 0x0301:  // acute
            if (base == U's') return 0x015B;
            if (base == U'S') return 0x015A;
            break;
        case 0x0331:  // line below
            switch (base) {
                case U'r': return 0x1E5F; case U'l': return 0x1E3B;
                case U'R': return 0x1E5E; case U'L': return 0x1E3A;
            }
            break;
        case 0x0CD5:  // Kannada length mark
            if (base == 0x0CBF) return 0x0CC0;
            if (base == 0x0CC6) return 0x0CC7;
            if (base == 0x0CCA) return 0x0CCB;
            break;
        case 0x0CD6:  // Kannada ai length mark
            if (base == 0x0CC6) return 0x0CC8;
            break;
        case 0x0CC2:  // Kannada uu sign as second part of o
            if (base == 0x0CC6) return 0x0CCA;
            break;
    }
    return 0;
}

inline std::u32string compose_canonical(std::u32string_view cps) {
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (!out.empty()) {
            if (char32_t composed = compose_pair(out.back(), cp)) {
                out.back() = composed;
                continue;
            }
        }
        out.push_back(cp);
    }
    return out;
}

inline std::string compose_canonical(std::string_view utf8) {
    return encode_utf8(compose_canonical(decode_utf8(utf8)));
}

inline bool is_kannada(char32_t cp) { return cp >= 0x0C80 && cp <= 0x0CFF; }

inline bool is_ascii_letter(char32_t cp) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

// Latin letters the romanization alphabets can produce, lowercase and
// uppercase precomposed forms.
inline bool is_latin_diacritic_letter(char32_t cp) {
    switch (cp) {
        case 0x0101: case 0x012B: case 0x016B: case 0x0113: case 0x014D:
        case 0x0100: case 0x012A: case 0x016A: case 0x0112: case 0x014C:
        case 0x1E37: case 0x1E47: case 0x1E6D: case 0x1E0D: case 0x1E43:
        case 0x1E36: case 0x1E46: case 0x1E6C: case 0x1E0C: case 0x1E42:
        case 0x1E45: case 0x1E44: case 0x00F1: case 0x00D1:
        case 0x015B: case 0x015A: case 0x1E63: case 0x1E62:
        case 0x1E5F: case 0x1E5E: case 0x1E3B: case 0x1E3A:
        case 0x1E25: case 0x1E24: case 0x1E5B: case 0x1E5A:
            return true;
        default:
            return false;
    }
}

inline bool is_roman_letter(char32_t cp) {
    return is_ascii_letter(cp) || is_latin_diacritic_letter(cp);
}

// Letter for tokenization purposes: roman or Kannada, plus the combining
// marks that ride on letters.
inline bool is_word_char(char32_t cp) {
    return is_roman_letter(cp) || is_kannada(cp) ||
           cp == 0x0310 || cp == 0x0304 || cp == 0x0323 || cp == 0x0307 ||
           cp == 0x0303 || cp == 0x0301 || cp == 0x0331;
}

inline char32_t fold_case(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    switch (cp) {
        case 0x0100: return 0x0101; case 0x012A: return 0x012B;
        case 0x016A: return 0x016B; case 0x0112: return 0x0113;
        case 0x014C: return 0x014D;
        case 0x1E36: return 0x1E37; case 0x1E46: return 0x1E47;
        case 0x1E6C: return 0x1E6D; case 0x1E0C: return 0x1E0D;
        case 0x1E42: return 0x1E43; case 0x1E44: return 0x1E45;
        case 0x00D1: return 0x00F1; case 0x015A: return 0x015B;
        case 0x1E62: return 0x1E63; case 0x1E5E: return 0x1E5F;
        case 0x1E3A: return 0x1E3B; case 0x1E24: return 0x1E25;
        case 0x1E5A: return 0x1E5B;
        default: return cp;
    }
}

inline std::string fold_case(std::string_view utf8) {
    std::u32string cps = decode_utf8(utf8);
    for (char32_t& cp : cps) cp = fold_case(cp);
    return encode_utf8(cps);
}

// Removes the scheme diacritics: ā -> a, ḷ -> l, ṅ -> n, ... Used only by the
// opt-in fold-diacritics contamination mode.
inline char32_t strip_mark(char32_t cp) {
    switch (cp) {
        case 0x0101: return U'a'; case 0x012B: return U'i';
        case 0x016B: return U'u'; case 0x0113: return U'e';
        case 0x014D: return U'o';
        case 0x1E37: case 0x1E3B: return U'l';
        case 0x1E47: case 0x1E45: case 0x00F1: return U'n';
        case 0x1E6D: return U't'; case 0x1E0D: return U'd';
        case 0x1E43: return U'm'; case 0x1E25: return U'h';
        case 0x015B: case 0x1E63: return U's';
        case 0x1E5F: case 0x1E5B: return U'r';
        default: return cp;
    }
}

inline std::string strip_marks(std::string_view utf8) {
    std::u32string cps = decode_utf8(utf8);
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        char32_t folded = strip_mark(fold_case(cp));
        if (folded == 0x0310) continue;  // combining candrabindu
        out.push_back(folded);
    }
    return encode_utf8(out);
}

struct WordSpan {
    std::string text;
    size_t begin = 0;  // byte offsets into the original string
    size_t end = 0;
};

// Splits on anything that is not a word character. Byte spans refer to the
// input, so callers can report hit locations.
inline std::vector<WordSpan> split_words(std::string_view utf8) {
    std::vector<WordSpan> words;
    size_t i = 0;
    size_t word_begin = 0;
    std::string current;
    auto flush = [&](size_t end_byte) {
        if (!current.empty()) {
            words.push_back({current, word_begin, end_byte});
            current.clear();
        }
    };
    while (i < utf8.size()) {
        size_t start = i;
        unsigned char c = static_cast<unsigned char>(utf8[i]);
        size_t len = 1;
        if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        if (start + len > utf8.size()) len = 1;
        char32_t cp = decode_utf8(utf8.substr(start, len))[0];
        if (is_word_char(cp)) {
            if (current.empty()) word_begin = start;
            current.append(utf8.substr(start, len));
        } else {
            flush(start);
        }
        i = start + len;
    }
    flush(utf8.size());
    return words;
}

}  // namespace tulu::uni
