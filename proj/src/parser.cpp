#include "n3s/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace n3s {

std::string_view to_string(ParseErrorKind k) {
  switch (k) {
  case ParseErrorKind::UnknownPrefix: return "UnknownPrefix";
  case ParseErrorKind::GraphTermOutsideSurfaceObject: return "GraphTermOutsideSurfaceObject";
  case ParseErrorKind::ListTermOutsideSurfaceSubject: return "ListTermOutsideSurfaceSubject";
  case ParseErrorKind::NonBlankNodeInGraffitiList: return "NonBlankNodeInGraffitiList";
  case ParseErrorKind::UnknownSurfacePredicate: return "UnknownSurfacePredicate";
  case ParseErrorKind::QueryNotTopLevel: return "QueryNotTopLevel";
  case ParseErrorKind::SyntaxError: return "SyntaxError";
  }
  return "ParseError";
}

namespace {

// ---------------------------------------------------------------- IRI resolution

bool has_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0])))
    return false;
  for (size_t i = 1; i < s.size(); ++i) {
    char c = s[i];
    if (c == ':')
      return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  return false;
}

std::string remove_dot_segments(std::string input) {
  std::string out;
  while (!input.empty()) {
    if (input.rfind("../", 0) == 0)
      input.erase(0, 3);
    else if (input.rfind("./", 0) == 0)
      input.erase(0, 2);
    else if (input.rfind("/./", 0) == 0)
      input.replace(0, 3, "/");
    else if (input == "/.")
      input = "/";
    else if (input.rfind("/../", 0) == 0) {
      input.replace(0, 4, "/");
      auto pos = out.rfind('/');
      out.erase(pos == std::string::npos ? 0 : pos);
    } else if (input == "/..") {
      input = "/";
      auto pos = out.rfind('/');
      out.erase(pos == std::string::npos ? 0 : pos);
    } else if (input == "." || input == "..")
      input.clear();
    else {
      size_t start = input[0] == '/' ? 1 : 0;
      size_t pos = input.find('/', start);
      out += input.substr(0, pos == std::string::npos ? input.size() : pos);
      input.erase(0, pos == std::string::npos ? input.size() : pos);
    }
  }
  return out;
}

struct IriParts {
  std::string scheme, authority, path, query, fragment;
  bool has_authority = false, has_query = false, has_fragment = false;
};

IriParts split_iri(std::string_view s) {
  IriParts p;
  if (auto h = s.find('#'); h != std::string_view::npos) {
    p.has_fragment = true;
    p.fragment = std::string(s.substr(h + 1));
    s = s.substr(0, h);
  }
  if (auto q = s.find('?'); q != std::string_view::npos) {
    p.has_query = true;
    p.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  if (has_scheme(s)) {
    auto c = s.find(':');
    p.scheme = std::string(s.substr(0, c));
    s = s.substr(c + 1);
  }
  if (s.rfind("//", 0) == 0) {
    p.has_authority = true;
    s = s.substr(2);
    auto sl = s.find('/');
    p.authority = std::string(s.substr(0, sl));
    s = sl == std::string_view::npos ? std::string_view() : s.substr(sl);
  }
  p.path = std::string(s);
  return p;
}

std::string recompose(const IriParts& p) {
  std::string out;
  if (!p.scheme.empty())
    out += p.scheme + ":";
  if (p.has_authority)
    out += "//" + p.authority;
  out += p.path;
  if (p.has_query)
    out += "?" + p.query;
  if (p.has_fragment)
    out += "#" + p.fragment;
  return out;
}

// RFC 3986 section 5.2 merge.
std::string resolve_reference(const std::string& base, const std::string& ref) {
  if (has_scheme(ref))
    return ref;
  IriParts b = split_iri(base);
  IriParts r = split_iri(ref);
  IriParts t;
  t.scheme = b.scheme;
  if (r.has_authority) {
    t.has_authority = true;
    t.authority = r.authority;
    t.path = remove_dot_segments(r.path);
    t.has_query = r.has_query;
    t.query = r.query;
  } else {
    t.has_authority = b.has_authority;
    t.authority = b.authority;
    if (r.path.empty()) {
      t.path = b.path;
      t.has_query = r.has_query ? true : b.has_query;
      t.query = r.has_query ? r.query : b.query;
    } else {
      t.has_query = r.has_query;
      t.query = r.query;
      if (r.path[0] == '/')
        t.path = remove_dot_segments(r.path);
      else {
        std::string merged;
        if (b.has_authority && b.path.empty())
          merged = "/" + r.path;
        else {
          auto pos = b.path.rfind('/');
          merged = (pos == std::string::npos ? "" : b.path.substr(0, pos + 1)) + r.path;
        }
        t.path = remove_dot_segments(merged);
      }
    }
  }
  t.has_fragment = r.has_fragment;
  t.fragment = r.fragment;
  return recompose(t);
}

// ---------------------------------------------------------------- lexer

enum class Tok {
  Eof,
  Dot,
  Semicolon,
  Comma,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  IriRef,    // value: raw reference, escapes resolved
  PName,     // value: prefix, value2: local
  BlankLabel,
  String,
  Integer,
  Decimal,
  Double,
  AtWord,    // value: word after '@'
  Ident,     // bare word: a, true, false, PREFIX, BASE
  HatHat,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string value;
  std::string value2;
  SourceSpan span;
};

[[noreturn]] void fail(ParseErrorKind kind, SourceSpan span, const std::string& msg) {
  throw ParseError(kind, span, msg);
}

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  SourceSpan here() const { return SourceSpan{line_, col_, pos_}; }

  Token next() {
    skip_ws();
    Token t;
    t.span = here();
    if (pos_ >= text_.size()) {
      t.kind = Tok::Eof;
      return t;
    }
    char c = text_[pos_];
    switch (c) {
    case '.': {
      // '.' may start a decimal (.5 is not legal Turtle, so always a dot here)
      bump();
      t.kind = Tok::Dot;
      return t;
    }
    case ';': bump(); t.kind = Tok::Semicolon; return t;
    case ',': bump(); t.kind = Tok::Comma; return t;
    case '(': bump(); t.kind = Tok::LParen; return t;
    case ')': bump(); t.kind = Tok::RParen; return t;
    case '{': bump(); t.kind = Tok::LBrace; return t;
    case '}': bump(); t.kind = Tok::RBrace; return t;
    case '[': bump(); t.kind = Tok::LBracket; return t;
    case ']': bump(); t.kind = Tok::RBracket; return t;
    case '<': return iri_ref(t);
    case '_': return blank_label(t);
    case '"': return string_lit(t, '"');
    case '\'': return string_lit(t, '\'');
    case '@': {
      bump();
      t.kind = Tok::AtWord;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
        t.value += take();
      if (t.value.empty())
        fail(ParseErrorKind::SyntaxError, t.span, "dangling '@'");
      return t;
    }
    case '^': {
      bump();
      if (pos_ >= text_.size() || text_[pos_] != '^')
        fail(ParseErrorKind::SyntaxError, t.span, "expected '^^'");
      bump();
      t.kind = Tok::HatHat;
      return t;
    }
    default:
      if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c)))
        return number(t);
      return name(t);
    }
  }

private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  char take() {
    char c = text_[pos_];
    bump();
    return c;
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void append_codepoint(std::string& out, uint32_t cp, SourceSpan span) {
    if (cp <= 0x7F)
      out += static_cast<char>(cp);
    else if (cp <= 0x7FF) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp <= 0xFFFF) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp <= 0x10FFFF) {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      fail(ParseErrorKind::SyntaxError, span, "invalid unicode escape");
    }
  }

  uint32_t hex_escape(int digits, SourceSpan span) {
    uint32_t cp = 0;
    for (int i = 0; i < digits; ++i) {
      if (pos_ >= text_.size() || !std::isxdigit(static_cast<unsigned char>(text_[pos_])))
        fail(ParseErrorKind::SyntaxError, span, "bad \\u escape");
      char c = take();
      cp = cp * 16 + (std::isdigit(static_cast<unsigned char>(c))
                          ? c - '0'
                          : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
    }
    return cp;
  }

  Token iri_ref(Token t) {
    bump(); // '<'
    t.kind = Tok::IriRef;
    while (true) {
      if (pos_ >= text_.size())
        fail(ParseErrorKind::SyntaxError, t.span, "unterminated IRI reference");
      char c = take();
      if (c == '>')
        break;
      if (c == '\\') {
        if (pos_ >= text_.size())
          fail(ParseErrorKind::SyntaxError, t.span, "unterminated IRI escape");
        char e = take();
        if (e == 'u')
          append_codepoint(t.value, hex_escape(4, t.span), t.span);
        else if (e == 'U')
          append_codepoint(t.value, hex_escape(8, t.span), t.span);
        else
          fail(ParseErrorKind::SyntaxError, t.span, "invalid IRI escape");
      } else if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' ||
                 c == '}' || c == '|' || c == '^' || c == '`') {
        fail(ParseErrorKind::SyntaxError, t.span, "illegal character in IRI reference");
      } else {
        t.value += c;
      }
    }
    return t;
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           static_cast<unsigned char>(c) >= 0x80;
  }

  Token blank_label(Token t) {
    bump(); // '_'
    if (pos_ >= text_.size() || text_[pos_] != ':')
      fail(ParseErrorKind::SyntaxError, t.span, "expected ':' after '_'");
    bump();
    t.kind = Tok::BlankLabel;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (name_char(c)) {
        t.value += take();
      } else if (c == '.') {
        // dots are label characters unless they terminate the statement
        if (pos_ + 1 < text_.size() && name_char(text_[pos_ + 1]))
          t.value += take();
        else
          break;
      } else {
        break;
      }
    }
    if (t.value.empty())
      fail(ParseErrorKind::SyntaxError, t.span, "empty blank node label");
    return t;
  }

  Token string_lit(Token t, char quote) {
    t.kind = Tok::String;
    bump();
    bool long_form = false;
    if (pos_ + 1 < text_.size() && text_[pos_] == quote && text_[pos_ + 1] == quote) {
      bump();
      bump();
      long_form = true;
    } else if (pos_ < text_.size() && text_[pos_] == quote) {
      bump(); // empty short string
      return t;
    }
    while (true) {
      if (pos_ >= text_.size())
        fail(ParseErrorKind::SyntaxError, t.span, "unterminated string literal");
      char c = take();
      if (c == quote) {
        if (!long_form)
          break;
        if (pos_ + 1 < text_.size() && text_[pos_] == quote && text_[pos_ + 1] == quote) {
          bump();
          bump();
          break;
        }
        t.value += c;
        continue;
      }
      if (!long_form && (c == '\n' || c == '\r'))
        fail(ParseErrorKind::SyntaxError, t.span, "newline in string literal");
      if (c == '\\') {
        if (pos_ >= text_.size())
          fail(ParseErrorKind::SyntaxError, t.span, "unterminated escape");
        char e = take();
        switch (e) {
        case 't': t.value += '\t'; break;
        case 'b': t.value += '\b'; break;
        case 'n': t.value += '\n'; break;
        case 'r': t.value += '\r'; break;
        case 'f': t.value += '\f'; break;
        case '"': t.value += '"'; break;
        case '\'': t.value += '\''; break;
        case '\\': t.value += '\\'; break;
        case 'u': append_codepoint(t.value, hex_escape(4, t.span), t.span); break;
        case 'U': append_codepoint(t.value, hex_escape(8, t.span), t.span); break;
        default: fail(ParseErrorKind::SyntaxError, t.span, "invalid string escape");
        }
      } else {
        t.value += c;
      }
    }
    return t;
  }

  Token number(Token t) {
    size_t start = pos_;
    if (text_[pos_] == '+' || text_[pos_] == '-')
      bump();
    bool digits_before = false, dot = false, exponent = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      bump();
      digits_before = true;
    }
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      dot = true;
      bump();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        bump();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t save = pos_;
      bump();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        bump();
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        exponent = true;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          bump();
      } else {
        pos_ = save; // not an exponent; leave 'e' for the next token
      }
    }
    if (!digits_before && !dot)
      fail(ParseErrorKind::SyntaxError, t.span, "malformed number");
    t.value = std::string(text_.substr(start, pos_ - start));
    t.kind = exponent ? Tok::Double : dot ? Tok::Decimal : Tok::Integer;
    return t;
  }

  // Prefixed name p:local, bare prefix form p:, or a bare identifier.
  Token name(Token t) {
    std::string word;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (name_char(c)) {
        word += take();
      } else if (c == '.') {
        if (pos_ + 1 < text_.size() && name_char(text_[pos_ + 1]))
          word += take();
        else
          break;
      } else {
        break;
      }
    }
    if (pos_ < text_.size() && text_[pos_] == ':') {
      bump();
      t.kind = Tok::PName;
      t.value = word; // prefix (possibly empty)
      while (pos_ < text_.size()) {
        char c = text_[pos_];
        if (name_char(c) || c == ':') {
          t.value2 += take();
        } else if (c == '%') {
          t.value2 += take();
          for (int i = 0; i < 2; ++i) {
            if (pos_ >= text_.size() || !std::isxdigit(static_cast<unsigned char>(text_[pos_])))
              fail(ParseErrorKind::SyntaxError, t.span, "bad %-escape in local name");
            t.value2 += take();
          }
        } else if (c == '\\') {
          bump();
          if (pos_ >= text_.size())
            fail(ParseErrorKind::SyntaxError, t.span, "bad local name escape");
          t.value2 += take();
        } else if (c == '.') {
          if (pos_ + 1 < text_.size() &&
              (name_char(text_[pos_ + 1]) || text_[pos_ + 1] == ':' || text_[pos_ + 1] == '%'))
            t.value2 += take();
          else
            break;
        } else {
          break;
        }
      }
      return t;
    }
    if (word.empty())
      fail(ParseErrorKind::SyntaxError, t.span,
           std::string("unexpected character '") + text_[pos_] + "'");
    t.kind = Tok::Ident;
    t.value = word;
    return t;
  }
};

// ---------------------------------------------------------------- parser

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text), lex_(text) {
    prescan_labels();
    advance();
  }

  Document parse() {
    while (cur_.kind != Tok::Eof) {
      if (cur_.kind == Tok::AtWord && cur_.value == "prefix") {
        advance();
        prefix_directive(true);
      } else if (cur_.kind == Tok::AtWord && cur_.value == "base") {
        advance();
        base_directive(true);
      } else if (cur_.kind == Tok::Ident && iequals(cur_.value, "prefix")) {
        advance();
        prefix_directive(false);
      } else if (cur_.kind == Tok::Ident && iequals(cur_.value, "base")) {
        advance();
        base_directive(false);
      } else {
        statement(doc_.root, 0);
      }
    }
    return std::move(doc_);
  }

private:
  std::string_view text_;
  Lexer lex_;
  Token cur_;
  Document doc_;
  std::set<std::string> used_labels_;
  int anon_counter_ = 0;
  static constexpr int kMaxNesting = 512;

  static bool iequals(const std::string& a, std::string_view b) {
    if (a.size() != b.size())
      return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(a[i])) !=
          std::tolower(static_cast<unsigned char>(b[i])))
        return false;
    return true;
  }

  void prescan_labels() {
    Lexer scan(text_);
    while (true) {
      Token t = scan.next();
      if (t.kind == Tok::Eof)
        break;
      if (t.kind == Tok::BlankLabel)
        used_labels_.insert(t.value);
    }
  }

  void advance() { cur_ = lex_.next(); }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind)
      fail(ParseErrorKind::SyntaxError, cur_.span, std::string("expected ") + what);
    advance();
  }

  std::string fresh_anon_label() {
    std::string label;
    do {
      label = "anon" + std::to_string(++anon_counter_);
    } while (used_labels_.count(label));
    used_labels_.insert(label);
    return label;
  }

  std::string expand(const Token& t) {
    if (t.kind == Tok::IriRef) {
      if (has_scheme(t.value))
        return t.value;
      if (!doc_.base)
        fail(ParseErrorKind::SyntaxError, t.span, "relative IRI without @base");
      return resolve_reference(*doc_.base, t.value);
    }
    const std::string* ns = doc_.prefixes.find(t.value);
    if (!ns)
      fail(ParseErrorKind::UnknownPrefix, t.span, "prefix '" + t.value + ":' not declared");
    return *ns + t.value2;
  }

  void prefix_directive(bool turtle_style) {
    if (cur_.kind != Tok::PName || !cur_.value2.empty())
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected prefix name ending in ':'");
    std::string prefix = cur_.value;
    advance();
    if (cur_.kind != Tok::IriRef)
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected IRI reference");
    std::string ns = cur_.value;
    if (!has_scheme(ns)) {
      if (!doc_.base)
        fail(ParseErrorKind::SyntaxError, cur_.span, "relative prefix IRI without @base");
      ns = resolve_reference(*doc_.base, ns);
    }
    advance();
    if (turtle_style)
      expect(Tok::Dot, "'.' after @prefix directive");
    doc_.prefixes.set(prefix, ns);
  }

  void base_directive(bool turtle_style) {
    if (cur_.kind != Tok::IriRef)
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected IRI reference");
    std::string base = cur_.value;
    if (!has_scheme(base)) {
      if (!doc_.base)
        fail(ParseErrorKind::SyntaxError, cur_.span, "relative @base without a previous base");
      base = resolve_reference(*doc_.base, base);
    }
    advance();
    if (turtle_style)
      expect(Tok::Dot, "'.' after @base directive");
    doc_.base = base;
  }

  // One statement into `surface`; depth counts enclosing surfaces.
  void statement(Surface& surface, int depth) {
    if (depth > kMaxNesting)
      fail(ParseErrorKind::SyntaxError, cur_.span, "surfaces nested too deeply");
    if (cur_.kind == Tok::LParen) {
      surface_statement(surface, depth);
      return;
    }
    if (cur_.kind == Tok::LBrace)
      fail(ParseErrorKind::GraphTermOutsideSurfaceObject, cur_.span,
           "graph term may only appear as the object of a surface triple");
    Term subject = subject_term(surface, depth);
    predicate_object_list(surface, depth, subject);
    expect(Tok::Dot, "'.' at end of statement");
  }

  Term subject_term(Surface& surface, int depth) {
    switch (cur_.kind) {
    case Tok::IriRef:
    case Tok::PName: {
      Term t = Term::iri(expand(cur_));
      advance();
      return t;
    }
    case Tok::BlankLabel: {
      Term t = Term::blank(cur_.value);
      advance();
      return t;
    }
    case Tok::LBracket:
      return bracket_node(surface, depth);
    case Tok::String:
    case Tok::Integer:
    case Tok::Decimal:
    case Tok::Double:
      fail(ParseErrorKind::SyntaxError, cur_.span, "literal cannot be a subject");
    default:
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected subject");
    }
  }

  // '[' ']' or '[' predicateObjectList ']' — returns the fresh blank node.
  Term bracket_node(Surface& surface, int depth) {
    advance(); // '['
    Term node = Term::blank(fresh_anon_label());
    if (cur_.kind == Tok::RBracket) {
      advance();
      return node;
    }
    predicate_object_list(surface, depth, node);
    expect(Tok::RBracket, "']'");
    return node;
  }

  void predicate_object_list(Surface& surface, int depth, const Term& subject) {
    while (true) {
      Term predicate = verb();
      if (predicate.value() == iri::log_on_negative_surface ||
          predicate.value() == iri::log_on_query_surface)
        fail(ParseErrorKind::SyntaxError, cur_.span,
             "surface triple requires a graffiti list in the subject position");
      while (true) {
        object_into(surface, depth, subject, predicate);
        if (cur_.kind == Tok::Comma) {
          advance();
          continue;
        }
        break;
      }
      if (cur_.kind == Tok::Semicolon) {
        // swallow repeated/trailing semicolons
        while (cur_.kind == Tok::Semicolon)
          advance();
        if (cur_.kind == Tok::Dot || cur_.kind == Tok::RBracket)
          return;
        continue;
      }
      return;
    }
  }

  Term verb() {
    if (cur_.kind == Tok::Ident && cur_.value == "a") {
      advance();
      return Term::iri(std::string(iri::rdf_type));
    }
    if (cur_.kind == Tok::IriRef || cur_.kind == Tok::PName) {
      Term t = Term::iri(expand(cur_));
      advance();
      return t;
    }
    fail(ParseErrorKind::SyntaxError, cur_.span, "expected predicate");
  }

  void object_into(Surface& surface, int depth, const Term& subject, const Term& predicate) {
    switch (cur_.kind) {
    case Tok::LBrace:
      fail(ParseErrorKind::UnknownSurfacePredicate, cur_.span,
           "graph term object requires a surface predicate");
    case Tok::LParen:
      fail(ParseErrorKind::ListTermOutsideSurfaceSubject, cur_.span,
           "list term may only appear as the subject of a surface triple");
    case Tok::IriRef:
    case Tok::PName: {
      add_item(surface, SurfaceItem::fact(Triple(subject, predicate, Term::iri(expand(cur_)))));
      advance();
      return;
    }
    case Tok::BlankLabel: {
      add_item(surface, SurfaceItem::fact(Triple(subject, predicate, Term::blank(cur_.value))));
      advance();
      return;
    }
    case Tok::LBracket: {
      Term node = bracket_node(surface, depth);
      add_item(surface, SurfaceItem::fact(Triple(subject, predicate, node)));
      return;
    }
    case Tok::Ident:
      if (cur_.value == "true" || cur_.value == "false") {
        add_item(surface, SurfaceItem::fact(Triple(
                              subject, predicate,
                              Term::literal(cur_.value, std::string(iri::xsd_boolean)))));
        advance();
        return;
      }
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected object");
    case Tok::String: {
      std::string lexical = cur_.value;
      advance();
      if (cur_.kind == Tok::AtWord) {
        std::string lang = cur_.value;
        advance();
        add_item(surface, SurfaceItem::fact(Triple(
                              subject, predicate, Term::literal(lexical, "", lang))));
        return;
      }
      if (cur_.kind == Tok::HatHat) {
        advance();
        if (cur_.kind != Tok::IriRef && cur_.kind != Tok::PName)
          fail(ParseErrorKind::SyntaxError, cur_.span, "expected datatype IRI after '^^'");
        std::string dt = expand(cur_);
        advance();
        add_item(surface, SurfaceItem::fact(Triple(subject, predicate,
                                                   Term::literal(lexical, dt))));
        return;
      }
      add_item(surface, SurfaceItem::fact(Triple(subject, predicate, Term::literal(lexical))));
      return;
    }
    case Tok::Integer:
    case Tok::Decimal:
    case Tok::Double: {
      std::string_view dt = cur_.kind == Tok::Integer   ? iri::xsd_integer
                            : cur_.kind == Tok::Decimal ? iri::xsd_decimal
                                                        : iri::xsd_double;
      add_item(surface, SurfaceItem::fact(Triple(subject, predicate,
                                                 Term::literal(cur_.value, std::string(dt)))));
      advance();
      return;
    }
    default:
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected object");
    }
  }

  // '(' g* ')' (log:onNegativeSurface | log:onQuerySurface) '{' ... '}' '.'
  void surface_statement(Surface& surface, int depth) {
    SourceSpan list_span = cur_.span;
    advance(); // '('
    std::vector<std::string> graffiti;
    std::set<std::string> seen;
    while (cur_.kind != Tok::RParen) {
      if (cur_.kind == Tok::BlankLabel) {
        if (!seen.insert(cur_.value).second)
          fail(ParseErrorKind::SyntaxError, cur_.span,
               "duplicate graffiti label '_:" + cur_.value + "'");
        graffiti.push_back(cur_.value);
        advance();
      } else if (cur_.kind == Tok::Eof) {
        fail(ParseErrorKind::SyntaxError, cur_.span, "unterminated graffiti list");
      } else {
        fail(ParseErrorKind::NonBlankNodeInGraffitiList, cur_.span,
             "graffiti list may contain only blank nodes");
      }
    }
    advance(); // ')'

    if (cur_.kind != Tok::IriRef && cur_.kind != Tok::PName) {
      if (cur_.kind == Tok::Ident && cur_.value == "a")
        fail(ParseErrorKind::ListTermOutsideSurfaceSubject, list_span,
             "list term subject requires a surface predicate");
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected surface predicate");
    }
    std::string predicate = expand(cur_);
    SourceSpan pred_span = cur_.span;
    advance();

    SurfaceKind kind;
    if (predicate == iri::log_on_negative_surface)
      kind = SurfaceKind::Negative;
    else if (predicate == iri::log_on_query_surface)
      kind = SurfaceKind::Query;
    else if (cur_.kind == Tok::LBrace)
      fail(ParseErrorKind::UnknownSurfacePredicate, pred_span,
           "unknown surface predicate <" + predicate + ">");
    else
      fail(ParseErrorKind::ListTermOutsideSurfaceSubject, list_span,
           "list term may only appear as the subject of a surface triple");

    if (kind == SurfaceKind::Query && depth > 0)
      fail(ParseErrorKind::QueryNotTopLevel, pred_span,
           "query surfaces may only appear at the top level");

    if (cur_.kind != Tok::LBrace)
      fail(ParseErrorKind::SyntaxError, cur_.span, "expected '{' after surface predicate");
    SourceSpan brace_span = cur_.span;
    advance();

    Surface child;
    child.kind = kind;
    child.graffiti = std::move(graffiti);
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::Eof)
        fail(ParseErrorKind::SyntaxError, brace_span, "unterminated graph term");
      if (kind == SurfaceKind::Query && (cur_.kind == Tok::LParen || cur_.kind == Tok::LBrace)) {
        if (cur_.kind == Tok::LParen)
          fail(ParseErrorKind::QueryNotTopLevel, cur_.span,
               "query surface may contain only triples");
        fail(ParseErrorKind::GraphTermOutsideSurfaceObject, cur_.span,
             "graph term may only appear as the object of a surface triple");
      }
      statement(child, depth + 1);
    }
    advance(); // '}'
    expect(Tok::Dot, "'.' after surface statement");
    add_item(surface, SurfaceItem::child(std::move(child)));
  }
};

// ---------------------------------------------------------------- serializer

bool plain_local_part(const std::string& local) {
  if (local.empty())
    return true;
  for (size_t i = 0; i < local.size(); ++i) {
    char c = local[i];
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
              static_cast<unsigned char>(c) >= 0x80 ||
              (c == '.' && i > 0 && i + 1 < local.size());
    if (!ok)
      return false;
  }
  return !std::isdigit(static_cast<unsigned char>(local[0]));
}

std::string render_iri(const std::string& value, const PrefixMap& prefixes) {
  const std::pair<std::string, std::string>* best = nullptr;
  for (const auto& entry : prefixes.entries) {
    if (value.rfind(entry.second, 0) == 0 &&
        (!best || entry.second.size() > best->second.size())) {
      if (plain_local_part(value.substr(entry.second.size())))
        best = &entry;
    }
  }
  if (best)
    return best->first + ":" + value.substr(best->second.size());
  return "<" + value + ">";
}

bool lexical_matches(const std::string& s, Tok numeric_kind) {
  Lexer lex(s);
  try {
    Token t = lex.next();
    if (t.kind != numeric_kind || t.value != s)
      return false;
    return lex.next().kind == Tok::Eof;
  } catch (const ParseError&) {
    return false;
  }
}

std::string render_term(const Term& t, const PrefixMap& prefixes, bool predicate_slot) {
  switch (t.kind()) {
  case TermKind::Iri:
    if (predicate_slot && t.value() == iri::rdf_type)
      return "a";
    return render_iri(t.value(), prefixes);
  case TermKind::BlankNode:
    return "_:" + t.value();
  case TermKind::Literal: {
    if (t.language().empty()) {
      if (t.datatype() == iri::xsd_integer && lexical_matches(t.value(), Tok::Integer))
        return t.value();
      if (t.datatype() == iri::xsd_decimal && lexical_matches(t.value(), Tok::Decimal))
        return t.value();
      if (t.datatype() == iri::xsd_double && lexical_matches(t.value(), Tok::Double))
        return t.value();
      if (t.datatype() == iri::xsd_boolean && (t.value() == "true" || t.value() == "false"))
        return t.value();
    }
    std::string out = "\"";
    for (char c : t.value()) {
      switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
      }
    }
    out += '"';
    if (!t.language().empty())
      out += "@" + t.language();
    else if (t.datatype() != iri::xsd_string)
      out += "^^" + render_iri(t.datatype(), prefixes);
    return out;
  }
  }
  return {};
}

void serialize_surface_contents(std::string& out, const Surface& s, const PrefixMap& prefixes,
                                int indent) {
  std::string pad(indent * 2, ' ');
  for (const auto& item : s.contents) {
    if (!item.is_fact())
      continue;
    const Triple& t = item.fact();
    out += pad + render_term(t.subject, prefixes, false) + " " +
           render_term(t.predicate, prefixes, true) + " " +
           render_term(t.object, prefixes, false) + " .\n";
  }
  for (const auto& item : s.contents) {
    if (item.is_fact())
      continue;
    const Surface& child = item.child();
    out += pad + "(";
    for (const auto& g : child.graffiti)
      out += " _:" + g;
    out += child.graffiti.empty() ? ")" : " )";
    out += child.kind == SurfaceKind::Query ? " log:onQuerySurface {\n"
                                            : " log:onNegativeSurface {\n";
    serialize_surface_contents(out, child, prefixes, indent + 1);
    out += pad + "} .\n";
  }
}

bool document_uses_surfaces(const Surface& root) {
  return !child_positions(root).empty();
}

} // namespace

Document parse_document(std::string_view text) {
  return Parser(text).parse();
}

std::string serialize_document(const Document& d) {
  PrefixMap prefixes = d.prefixes;
  if (document_uses_surfaces(d.root) && !prefixes.find("log"))
    prefixes.set("log", std::string(iri::log_ns));
  std::string out;
  for (const auto& [prefix, ns] : prefixes.entries)
    out += "@prefix " + prefix + ": <" + ns + "> .\n";
  if (!prefixes.entries.empty() && !d.root.contents.empty())
    out += "\n";
  serialize_surface_contents(out, d.root, prefixes, 0);
  return out;
}

std::string render_term_n3s(const Term& t, const PrefixMap& prefixes, bool predicate_slot) {
  return render_term(t, prefixes, predicate_slot);
}

std::string render_triple_n3s(const Triple& t, const PrefixMap& prefixes) {
  return render_term(t.subject, prefixes, false) + " " + render_term(t.predicate, prefixes, true) +
         " " + render_term(t.object, prefixes, false) + " .";
}

std::string prefix_prelude(const PrefixMap& prefixes) {
  std::string out;
  bool has_log = false;
  for (const auto& [prefix, ns] : prefixes.entries) {
    out += "@prefix " + prefix + ": <" + ns + "> .\n";
    if (prefix == "log")
      has_log = true;
  }
  if (!has_log)
    out += "@prefix log: <" + std::string(iri::log_ns) + "> .\n";
  return out;
}

Term parse_term_n3s(const std::string& text, const PrefixMap& prefixes) {
  Document d = parse_document(prefix_prelude(prefixes) + "_:term0sub <urn:x-n3s:p> " + text + " .\n");
  if (d.root.contents.size() != 1 || !d.root.contents[0].is_fact())
    throw ParseError(ParseErrorKind::SyntaxError, {}, "expected a single term: " + text);
  return d.root.contents[0].fact().object;
}

std::vector<SurfaceItem> parse_items_n3s(const std::string& text, const PrefixMap& prefixes) {
  Document d = parse_document(prefix_prelude(prefixes) + text + "\n");
  return d.root.contents;
}

std::string expand_iri(const std::string& name, const PrefixMap& prefixes,
                       const std::optional<std::string>& base) {
  if (name.size() >= 2 && name.front() == '<' && name.back() == '>') {
    std::string ref = name.substr(1, name.size() - 2);
    if (has_scheme(ref))
      return ref;
    if (!base)
      throw ParseError(ParseErrorKind::SyntaxError, {}, "relative IRI without base");
    return resolve_reference(*base, ref);
  }
  auto colon = name.find(':');
  if (colon == std::string::npos)
    throw ParseError(ParseErrorKind::SyntaxError, {}, "not a prefixed name: " + name);
  std::string prefix = name.substr(0, colon);
  const std::string* ns = prefixes.find(prefix);
  if (!ns)
    throw ParseError(ParseErrorKind::UnknownPrefix, {}, "prefix '" + prefix + ":' not declared");
  return *ns + name.substr(colon + 1);
}

} // namespace n3s
