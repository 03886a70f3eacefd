#pragma once

// Small text helpers shared by the file readers and writers.

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "detbank/error.hpp"

namespace detbank::text {

// 17 significant digits: every finite double round-trips exactly.
inline void append_real(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

inline std::string format_real(double v) {
  std::string s;
  append_real(s, v);
  return s;
}

template <typename Int>
inline void append_int(std::string& out, Int v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <typename Int>
inline std::optional<Int> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits on a single delimiter, keeping empty fields.
inline std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Splits on runs of spaces/tabs, dropping empty fields.
inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Iterates lines; the callback receives (1-based line number, line without '\n').
template <typename Fn>
inline void for_each_line(std::string_view data, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    auto end = data.find('\n', start);
    if (end == std::string_view::npos) end = data.size();
    auto line = data.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    start = end + 1;
  }
}

inline std::vector<double> parse_real_list(std::string_view s, std::size_t line = 0) {
  std::vector<double> out;
  for (auto tok : split(s, ',')) {
    auto t = trim(tok);
    auto v = parse_real(t);
    if (!v) throw ParseError(line, "bad number '" + std::string(t) + "'");
    out.push_back(*v);
  }
  return out;
}

template <typename Int>
inline std::vector<Int> parse_int_list(std::string_view s, std::size_t line = 0) {
  std::vector<Int> out;
  for (auto tok : split(s, ',')) {
    auto t = trim(tok);
    auto v = parse_int<Int>(t);
    if (!v) throw ParseError(line, "bad integer '" + std::string(t) + "'");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<std::string> parse_name_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : split(s, ',')) {
    auto t = trim(tok);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// `key = value` files with `#` comments. Later keys override earlier ones.
struct KeyValue {
  std::string value;
  std::size_t line = 0;
};

inline std::map<std::string, KeyValue, std::less<>> parse_key_values(std::string_view data) {
  std::map<std::string, KeyValue, std::less<>> out;
  for_each_line(data, [&](std::size_t no, std::string_view line) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') return;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(no, "expected 'key = value'");
    auto key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(no, "empty key");
    out[std::string(key)] = KeyValue{std::string(trim(t.substr(eq + 1))), no};
  });
  return out;
}

}  // namespace detbank::text
