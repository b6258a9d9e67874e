#include "dlm/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "dlm/error.hpp"

namespace dlm::text {

std::string normalize(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw data_error("unicode: NFC normalizer unavailable");
    code_points(utf8);  // validates
    icu::UnicodeString us = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    us.toLower();
    icu::UnicodeString out = nfc->normalize(us, status);
    if (U_FAILURE(status)) throw data_error("unicode: normalization failed for '" + std::string(utf8) + "'");
    std::string result;
    out.toUTF8String(result);
    return result;
}

namespace {

std::size_t sequence_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 0;
}

}  // namespace

std::vector<std::string> code_points(std::string_view utf8) {
    std::vector<std::string> out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        std::size_t len = sequence_length(static_cast<unsigned char>(utf8[i]));
        bool ok = len != 0 && i + len <= utf8.size();
        for (std::size_t k = 1; ok && k < len; ++k)
            ok = (static_cast<unsigned char>(utf8[i + k]) & 0xC0) == 0x80;
        if (!ok) throw data_error("unicode: invalid UTF-8 in '" + std::string(utf8) + "'");
        out.emplace_back(utf8.substr(i, len));
        i += len;
    }
    return out;
}

std::size_t length(std::string_view utf8) {
    std::size_t n = 0;
    for (unsigned char c : utf8)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            return fields;
        }
        fields.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    std::size_t b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace dlm::text
