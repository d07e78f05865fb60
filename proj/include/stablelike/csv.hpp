#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stablelike::csv {

// Shortest round-trip decimal form, locale-independent ('.' decimal point).
// Used for every numeric cell so outputs are byte-reproducible.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// RFC-4180 quoting: fields containing comma, quote, CR or LF are quoted and
// embedded quotes doubled.
inline std::string escape_field(std::string_view f) {
  bool needs = f.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(f);
  std::string out;
  out.reserve(f.size() + 2);
  out.push_back('"');
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class Writer {
public:
  explicit Writer(std::ostream& os) : os_(os) {}

  Writer& field(std::string_view s) {
    if (!first_) os_ << ',';
    os_ << escape_field(s);
    first_ = false;
    return *this;
  }
  Writer& field(const char* s) { return field(std::string_view(s)); }
  Writer& field(const std::string& s) { return field(std::string_view(s)); }
  Writer& field(double v) { return field(format_double(v)); }
  Writer& field(std::uint64_t v) { return field(format_u64(v)); }
  Writer& field(int v) { return field(format_u64(static_cast<std::uint64_t>(v))); }
  Writer& field(bool v) { return field(v ? std::string_view("true") : std::string_view("false")); }

  void end_row() {
    os_ << '\n';
    first_ = true;
  }

  template <typename... Ts>
  void row(Ts&&... vals) {
    (field(std::forward<Ts>(vals)), ...);
    end_row();
  }

private:
  std::ostream& os_;
  bool first_ = true;
};

// Minimal reader: splits a line on commas honoring RFC-4180 quotes.
inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc())
    throw std::runtime_error("csv: bad numeric field '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc())
    throw std::runtime_error("csv: bad integer field '" + s + "'");
  return v;
}

}  // namespace stablelike::csv
