#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Minimal pretty JSON emitter for reports. Reals are printed with a fixed
// number of decimals, which general-purpose JSON libraries do not offer.
namespace topicaux::json {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

inline std::string fixed(double v, int decimals = 4) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // no "-0.0000"
  return s;
}

inline std::string fixed(const std::optional<double>& v, int decimals = 4) { return v ? fixed(*v, decimals) : "null"; }

/// Builds an object or array one member at a time.
class Writer {
 public:
  explicit Writer(int indent = 0) : indent_(indent) {}

  Writer& field(std::string_view key, std::string raw_value) {
    items_.push_back(quote(key) + ": " + std::move(raw_value));
    return *this;
  }
  Writer& item(std::string raw_value) {
    items_.push_back(std::move(raw_value));
    return *this;
  }

  std::string object() const { return wrap('{', '}'); }
  std::string array() const { return wrap('[', ']'); }
  // single-line forms for short lists
  std::string inline_array() const { return wrap_inline('[', ']'); }
  std::string inline_object() const { return wrap_inline('{', '}'); }

 private:
  std::string wrap_inline(char open, char close) const {
    std::string out(1, open);
    for (std::size_t i = 0; i < items_.size(); ++i) out += (i ? ", " : "") + items_[i];
    return out + close;
  }

  std::string wrap(char open, char close) const {
    if (items_.empty()) return std::string{open, close};
    const std::string pad(static_cast<std::size_t>(indent_ + 2), ' ');
    std::string out(1, open);
    out += '\n';
    for (std::size_t i = 0; i < items_.size(); ++i) {
      out += pad + items_[i];
      out += i + 1 < items_.size() ? ",\n" : "\n";
    }
    return out + std::string(static_cast<std::size_t>(indent_), ' ') + close;
  }

  int indent_;
  std::vector<std::string> items_;
};

}  // namespace topicaux::json
