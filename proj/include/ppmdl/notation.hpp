#pragma once

#include <cctype>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>

#include "ppmdl/tree.hpp"

namespace ppmdl {

// Text notation:
//   tree    := "[r=" INT " p=" INT "](" child ( " [d=" INT "] " child )* ")"
//   child   := tree | label
//   label   := [A-Za-z0-9_.:+-]+  |  '"' ( [^"\\] | '\\' ANY )* '"'
//   pattern := tree " @ tau=" INT " E=[" ( INT ( "," INT )* )? "]"
// Whitespace between tokens is optional on input.

namespace detail {

inline bool bare_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '+' || c == '-';
}

inline void write_label(std::ostream& out, const std::string& label) {
  bool bare = !label.empty();
  for (char c : label) bare = bare && bare_label_char(c);
  if (bare) {
    out << label;
    return;
  }
  out << '"';
  for (char c : label) {
    if (c == '"' || c == '\\') out << '\\';
    out << c;
  }
  out << '"';
}

inline void write_block(std::ostream& out, const Block& b, const Alphabet* alphabet) {
  if (b.is_leaf()) {
    if (alphabet)
      write_label(out, alphabet->label(b.event));
    else
      out << '#' << b.event;
    return;
  }
  out << "[r=" << b.repetitions << " p=" << b.period << "](";
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    if (i > 0) out << " [d=" << b.distances[i - 1] << "] ";
    write_block(out, b.children[i], alphabet);
  }
  out << ')';
}

}  // namespace detail

/// Renders labels through `alphabet`; with nullptr, leaves print as "#<id>"
/// (used for deterministic ordering keys).
inline std::string format_tree(const PatternTree& tree, const Alphabet* alphabet) {
  std::ostringstream out;
  detail::write_block(out, tree.root, alphabet);
  return out.str();
}

inline std::string format_pattern(const Pattern& p, const Alphabet* alphabet) {
  std::ostringstream out;
  detail::write_block(out, p.tree.root, alphabet);
  out << " @ tau=" << p.tau << " E=[";
  for (std::size_t i = 0; i < p.corrections.size(); ++i) out << (i ? "," : "") << p.corrections[i];
  out << ']';
  return out.str();
}

namespace detail {

class NotationParser {
 public:
  NotationParser(std::string_view text, Alphabet& alphabet, bool allow_new)
      : s_(text), alphabet_(alphabet), allow_new_(allow_new) {}

  Pattern pattern() {
    Pattern p;
    p.tree.root = tree();
    expect("@");
    expect("tau=");
    p.tau = integer();
    expect("E=[");
    skip_ws();
    if (!peek(']')) {
      p.corrections.push_back(integer());
      while (accept(",")) p.corrections.push_back(integer());
    }
    expect("]");
    end();
    return p;
  }

  Block tree_only() {
    Block b = tree();
    end();
    return b;
  }

 private:
  Block tree() {
    expect("[");
    expect("r=");
    Time r = integer();
    expect("p=");
    Time p = integer();
    expect("]");
    expect("(");
    Block b;
    b.repetitions = static_cast<int>(r);
    b.period = p;
    b.children.push_back(child());
    while (true) {
      skip_ws();
      if (accept(")")) break;
      expect("[");
      expect("d=");
      b.distances.push_back(integer());
      expect("]");
      b.children.push_back(child());
    }
    return b;
  }

  Block child() {
    skip_ws();
    if (peek('[')) return tree();
    return leaf(event());
  }

  EventId event() {
    std::string label;
    if (peek('"')) {
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        label += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated quoted label");
      ++pos_;
    } else {
      while (pos_ < s_.size() && bare_label_char(s_[pos_])) label += s_[pos_++];
      if (label.empty()) fail("expected an event label");
    }
    if (auto id = alphabet_.find(label)) return *id;
    if (!allow_new_) throw DomainError("unknown event label '" + label + "'");
    return alphabet_.intern(label);
  }

  Time integer() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    Time v = 0;
    std::string_view tok = s_.substr(start, pos_ - start);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) fail("expected an integer");
    return v;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }
  void end() {
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(1, what + " at column " + std::to_string(pos_ + 1));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  Alphabet& alphabet_;
  bool allow_new_;
};

}  // namespace detail

/// Parses one pattern. Unknown labels are an error unless `allow_new`.
inline Pattern parse_pattern(std::string_view text, Alphabet& alphabet, bool allow_new = false) {
  Pattern p = detail::NotationParser(text, alphabet, allow_new).pattern();
  validate_tree(p.tree);
  return p;
}

inline PatternTree parse_tree(std::string_view text, Alphabet& alphabet, bool allow_new = false) {
  PatternTree t{detail::NotationParser(text, alphabet, allow_new).tree_only()};
  validate_tree(t);
  return t;
}

/// One pattern per line; blank lines and '#' comments skipped. Errors carry
/// the file line number.
inline std::vector<Pattern> read_patterns(std::istream& in, Alphabet& alphabet, bool allow_new = false) {
  std::vector<Pattern> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    try {
      out.push_back(parse_pattern(s, alphabet, allow_new));
    } catch (const ParseError& e) {
      std::string msg = e.what();
      throw ParseError(lineno, msg.substr(msg.find(": ") + 2));
    } catch (const DomainError& e) {
      throw DomainError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ppmdl
