#pragma once

#include <cctype>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topos_forge/error.hpp"

namespace topos::io {

/// Compiles the line-oriented definition language to the JSON document form.
///
///   category graph
///   presheaf G
///     V = v1 v2
///     E = e
///     s : e -> v1
///   signature
///     sort node
///     relation adj : node, node
///   structure M
///     sort node = G
///     relation adj @V : (v1, v2), (v2, v1)
///   formula has_out (y:node) : exists z:node. adj(y, z)
///   filter U over 1 2 : principal 1
///   family pair = M N
///
/// Section headers start in column 1; their entries are indented.
/// '#' starts a comment.
class DslCompiler {
 public:
  explicit DslCompiler(std::string text) : text_(std::move(text)) {}

  nlohmann::json compile() {
    split_lines();
    doc_ = nlohmann::json::object();
    std::size_t i = 0;
    while (i < lines_.size()) {
      const Line& head = lines_[i];
      if (head.indented) fail(head, 1, "entry outside of a section");
      std::size_t end = i + 1;
      while (end < lines_.size() && lines_[end].indented) ++end;
      section(i, end);
      i = end;
    }
    return doc_;
  }

 private:
  struct Line {
    std::size_t number = 0;
    std::string text;  // comment stripped
    bool indented = false;
  };
  struct Token {
    std::string text;
    std::size_t col = 0;
  };

  std::string text_;
  std::vector<Line> lines_;
  nlohmann::json doc_;

  [[noreturn]] static void fail(const Line& l, std::size_t col, const std::string& msg) {
    throw ParseError(msg, l.number, col);
  }

  void split_lines() {
    std::istringstream in(text_);
    std::string raw;
    std::size_t n = 0;
    while (std::getline(in, raw)) {
      ++n;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      if (raw.find_first_not_of(" \t") == std::string::npos) continue;
      lines_.push_back({n, raw, raw[0] == ' ' || raw[0] == '\t'});
    }
  }

  static bool punct(char c) { return c == ',' || c == '(' || c == ')' || c == '{' || c == '}' || c == ':' || c == '=' || c == '@'; }

  static std::vector<Token> tokens(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
      char c = s[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
        out.push_back({"->", i + 1});
        i += 2;
        continue;
      }
      if (punct(c)) {
        out.push_back({std::string(1, c), i + 1});
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t' && !punct(s[j]) &&
             !(s[j] == '-' && j + 1 < s.size() && s[j + 1] == '>')) {
        ++j;
      }
      out.push_back({s.substr(i, j - i), i + 1});
      i = j;
    }
    return out;
  }

  /// Cursor over the tokens of one line.
  struct Cursor {
    const Line& line;
    std::vector<Token> toks;
    std::size_t pos = 0;

    bool done() const { return pos >= toks.size(); }
    std::size_t col() const { return done() ? line.text.size() + 1 : toks[pos].col; }
    bool peek(const std::string& t) const { return !done() && toks[pos].text == t; }
    bool accept(const std::string& t) {
      if (!peek(t)) return false;
      ++pos;
      return true;
    }
    void expect(const std::string& t) {
      if (!accept(t)) fail(line, col(), "expected '" + t + "'");
    }
    std::string word(const std::string& what) {
      if (done() || (toks[pos].text.size() == 1 && punct(toks[pos].text[0])) || toks[pos].text == "->") {
        fail(line, col(), "expected " + what);
      }
      return toks[pos++].text;
    }
    std::vector<std::string> words() {
      std::vector<std::string> out;
      while (!done() && !(toks[pos].text.size() == 1 && punct(toks[pos].text[0])) && toks[pos].text != "->") {
        out.push_back(toks[pos++].text);
      }
      return out;
    }
    /// w (, w)*  possibly empty
    std::vector<std::string> word_list(const std::string& what) {
      std::vector<std::string> out;
      if (done() || peek("->") || peek(")") || peek("}")) return out;
      out.push_back(word(what));
      while (accept(",")) out.push_back(word(what));
      return out;
    }
    void end() {
      if (!done()) fail(line, col(), "unexpected '" + toks[pos].text + "'");
    }
  };

  Cursor cursor(const Line& l) const { return Cursor{l, tokens(l.text), 0}; }

  void add_named(const std::string& section, const std::string& name, nlohmann::json value, const Line& l) {
    if (doc_.contains(section) && doc_[section].contains(name)) fail(l, 1, section + " '" + name + "' declared twice");
    doc_[section][name] = std::move(value);
  }

  void section(std::size_t begin, std::size_t end) {
    const Line& head = lines_[begin];
    Cursor c = cursor(head);
    std::string kw = c.word("a section keyword");
    if (kw == "category") return category(c, begin, end);
    if (kw == "presheaf") return presheaf(c, begin, end);
    if (kw == "map") return map(c, begin, end);
    if (kw == "signature") return signature(c, begin, end);
    if (kw == "structure") return structure(c, begin, end);
    if (kw == "formula") return formula(begin, end);
    if (kw == "filter") return filter(c, begin, end);
    if (kw == "family") return family(c, begin, end);
    fail(head, 1, "unknown section '" + kw + "'");
  }

  void no_body(std::size_t begin, std::size_t end) {
    if (end > begin + 1) fail(lines_[begin + 1], 1, "this section takes no indented entries");
  }

  void category(Cursor& c, std::size_t begin, std::size_t end) {
    if (doc_.contains("category")) fail(c.line, 1, "category declared twice");
    if (!c.done()) {
      doc_["category"] = c.word("a base name");
      c.end();
      return no_body(begin, end);
    }
    nlohmann::json cat = {{"objects", nlohmann::json::array()},
                          {"morphisms", nlohmann::json::array()},
                          {"identities", nlohmann::json::object()},
                          {"compose", nlohmann::json::array()}};
    for (std::size_t i = begin + 1; i < end; ++i) {
      Cursor e = cursor(lines_[i]);
      std::string kw = e.word("object, morphism, identity or compose");
      if (kw == "object" || kw == "objects") {
        for (const auto& o : e.words()) cat["objects"].push_back(o);
      } else if (kw == "morphism") {
        std::string name = e.word("a morphism name");
        e.expect(":");
        std::string dom = e.word("a domain");
        e.expect("->");
        std::string cod = e.word("a codomain");
        cat["morphisms"].push_back({{"name", name}, {"dom", dom}, {"cod", cod}});
      } else if (kw == "identity") {
        std::string o = e.word("an object");
        e.expect("=");
        cat["identities"][o] = e.word("a morphism name");
      } else if (kw == "compose") {
        std::string g = e.word("a morphism"), f = e.word("a morphism");
        e.expect("=");
        cat["compose"].push_back({g, f, e.word("a morphism")});
      } else {
        fail(e.line, 1, "unknown category entry '" + kw + "'");
      }
      e.end();
    }
    doc_["category"] = cat;
  }

  /// a -> b, c -> d
  static nlohmann::json arrow_table(Cursor& e) {
    nlohmann::json t = nlohmann::json::object();
    if (e.done()) return t;
    do {
      std::string from = e.word("an element");
      e.expect("->");
      t[from] = e.word("an element");
    } while (e.accept(","));
    return t;
  }

  void presheaf(Cursor& c, std::size_t begin, std::size_t end) {
    std::string name = c.word("a presheaf name");
    c.end();
    add_named("presheaves", name, body_presheaf(begin + 1, end), c.line);
  }

  nlohmann::json body_presheaf(std::size_t begin, std::size_t end) {
    nlohmann::json p = {{"carrier", nlohmann::json::object()}, {"action", nlohmann::json::object()}};
    for (std::size_t i = begin; i < end; ++i) {
      Cursor e = cursor(lines_[i]);
      std::string head = e.word("an object or morphism name");
      if (e.accept("=")) {
        p["carrier"][head] = e.words();
      } else {
        e.expect(":");
        p["action"][head] = arrow_table(e);
      }
      e.end();
    }
    return p;
  }

  void map(Cursor& c, std::size_t begin, std::size_t end) {
    std::string name = c.word("a map name");
    c.expect(":");
    std::string src = c.word("a source presheaf");
    c.expect("->");
    std::string dst = c.word("a target presheaf");
    c.end();
    nlohmann::json m = {{"src", src}, {"dst", dst}, {"components", nlohmann::json::object()}};
    for (std::size_t i = begin + 1; i < end; ++i) {
      Cursor e = cursor(lines_[i]);
      std::string obj = e.word("an object");
      e.expect(":");
      m["components"][obj] = arrow_table(e);
      e.end();
    }
    add_named("maps", name, m, c.line);
  }

  void signature(Cursor& c, std::size_t begin, std::size_t end) {
    c.end();
    if (doc_.contains("signature")) fail(c.line, 1, "signature declared twice");
    nlohmann::json sig = {{"sorts", nlohmann::json::array()},
                          {"functions", nlohmann::json::object()},
                          {"relations", nlohmann::json::object()}};
    for (std::size_t i = begin + 1; i < end; ++i) {
      Cursor e = cursor(lines_[i]);
      std::string kw = e.word("sort, function, constant or relation");
      if (kw == "sort" || kw == "sorts") {
        for (const auto& s : e.words()) sig["sorts"].push_back(s);
      } else if (kw == "function" || kw == "constant") {
        std::string f = e.word("a function name");
        e.expect(":");
        std::vector<std::string> args;
        if (kw == "function") args = e.word_list("a sort");
        if (kw == "function" || e.peek("->")) e.expect("->");
        sig["functions"][f] = {{"args", args}, {"result", e.word("a result sort")}};
      } else if (kw == "relation") {
        std::string r = e.word("a relation name");
        e.expect(":");
        sig["relations"][r] = e.word_list("a sort");
      } else {
        fail(e.line, 1, "unknown signature entry '" + kw + "'");
      }
      e.end();
    }
    doc_["signature"] = sig;
  }

  /// (a, b) or a bare word for unary tuples.
  static nlohmann::json tuple(Cursor& e) {
    if (e.accept("(")) {
      auto ws = e.word_list("an element");
      e.expect(")");
      return ws;
    }
    return nlohmann::json::array({e.word("an element")});
  }

  void structure(Cursor& c, std::size_t begin, std::size_t end) {
    std::string name = c.word("a structure name");
    c.end();
    nlohmann::json s = {{"sorts", nlohmann::json::object()},
                        {"functions", nlohmann::json::object()},
                        {"relations", nlohmann::json::object()}};
    for (std::size_t i = begin + 1; i < end; ++i) {
      Cursor e = cursor(lines_[i]);
      std::string kw = e.word("sort, function or relation");
      if (kw == "sort") {
        std::string sort = e.word("a sort name");
        e.expect("=");
        s["sorts"][sort] = e.word("a presheaf name");
      } else if (kw == "function" || kw == "relation") {
        std::string sym = e.word("a symbol");
        e.expect("@");
        std::string obj = e.word("an object");
        e.expect(":");
        nlohmann::json& rows = s[kw == "function" ? "functions" : "relations"][sym][obj];
        if (rows.is_null()) rows = nlohmann::json::array();
        if (!e.done()) {
          do {
            nlohmann::json args = tuple(e);
            if (kw == "function") {
              e.expect("->");
              rows.push_back({args, e.word("a result element")});
            } else {
              rows.push_back(args);
            }
          } while (e.accept(","));
        }
      } else {
        fail(e.line, 1, "unknown structure entry '" + kw + "'");
      }
      e.end();
    }
    add_named("structures", name, s, c.line);
  }

  void formula(std::size_t begin, std::size_t end) {
    const Line& l = lines_[begin];
    const std::string& t = l.text;
    std::size_t i = t.find("formula") + 7;
    auto skip = [&] {
      while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
    };
    skip();
    std::size_t j = i;
    while (j < t.size() && t[j] != ' ' && t[j] != '\t' && t[j] != '(' && t[j] != ':') ++j;
    if (j == i) fail(l, i + 1, "expected a formula name");
    std::string name = t.substr(i, j - i);
    i = j;
    skip();
    std::string ctx;
    if (i < t.size() && t[i] == '(') {
      auto close = t.find(')', i);
      if (close == std::string::npos) fail(l, i + 1, "unclosed context");
      ctx = t.substr(i + 1, close - i - 1);
      i = close + 1;
      skip();
    }
    if (i >= t.size() || t[i] != ':') fail(l, i + 1, "expected ':' before the formula text");
    std::size_t start = t.find_first_not_of(" \t", i + 1);
    if (start == std::string::npos) start = t.size();
    std::string text = t.substr(start);
    for (std::size_t k = begin + 1; k < end; ++k) text += "\n" + lines_[k].text;
    nlohmann::json at = nlohmann::json::array({l.number, start + 1});
    add_named("formulas", name, {{"context", ctx}, {"text", text}, {"at", at}}, l);
  }

  void filter(Cursor& c, std::size_t begin, std::size_t end) {
    std::string name = c.word("a filter name");
    c.expect("over");
    nlohmann::json f = {{"indices", c.words()}};
    c.expect(":");
    std::string kind = c.word("principal or members");
    if (kind == "principal") {
      f["principal"] = c.words();
    } else if (kind == "members") {
      f["members"] = nlohmann::json::array();
      while (c.accept("{")) {
        f["members"].push_back(c.word_list("an index"));
        c.expect("}");
      }
    } else {
      fail(c.line, 1, "expected principal or members");
    }
    c.end();
    no_body(begin, end);
    add_named("filters", name, f, c.line);
  }

  void family(Cursor& c, std::size_t begin, std::size_t end) {
    std::string name = c.word("a family name");
    c.expect("=");
    nlohmann::json members = c.words();
    c.end();
    no_body(begin, end);
    add_named("families", name, members, c.line);
  }
};

inline nlohmann::json compile_dsl(const std::string& text) { return DslCompiler(text).compile(); }

}  // namespace topos::io
