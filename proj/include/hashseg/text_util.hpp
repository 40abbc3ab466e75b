// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_TEXT_UTIL_HPP
#define HASHSEG_TEXT_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hashseg {

// ASCII-only case handling. Non-ASCII bytes pass through untouched; hashtag
// processing treats them as ordinary characters.
char ascii_lower(char c);
bool is_ascii_upper(char c);
bool is_ascii_lower(char c);
bool is_ascii_alpha(char c);
bool is_ascii_alnum(char c);

std::string to_lower(std::string_view s);

// Splits on runs of whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

// Maximal runs of ASCII letters, lowercased.
std::vector<std::string> alpha_tokens(std::string_view s);

// Maximal runs of ASCII letters/digits, lowercased.
std::vector<std::string> alnum_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Locale-independent numeric parsing. The whole input must be consumed.
bool parse_u64(std::string_view s, uint64_t& out);
bool parse_i64(std::string_view s, int64_t& out);
bool parse_double(std::string_view s, double& out);

// Fixed-point formatting for reports and tabular output.
std::string format_fixed(double v, int decimals);
// Shortest exact round-trip form, 17 significant digits. Used by model files.
std::string format_exact(double v);

}  // namespace hashseg

#endif
