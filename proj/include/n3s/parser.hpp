#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "n3s/surface.hpp"

namespace n3s {

struct SourceSpan {
  int line = 1;   // 1-based
  int column = 1; // 1-based
  size_t offset = 0;
};

enum class ParseErrorKind {
  UnknownPrefix,
  GraphTermOutsideSurfaceObject,
  ListTermOutsideSurfaceSubject,
  NonBlankNodeInGraffitiList,
  UnknownSurfacePredicate,
  QueryNotTopLevel,
  SyntaxError,
};

std::string_view to_string(ParseErrorKind k);

class ParseError : public std::runtime_error {
public:
  ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " at " + std::to_string(span.line) +
                           ":" + std::to_string(span.column) + ": " + message),
        kind_(kind), span_(span), message_(message) {}

  ParseErrorKind kind() const { return kind_; }
  SourceSpan span() const { return span_; }
  const std::string& message() const { return message_; }

private:
  ParseErrorKind kind_;
  SourceSpan span_;
  std::string message_;
};

/// Parses N3S text (the Turtle subset plus surface statements) into a
/// Document. All top-level triples land on the root positive surface.
/// Throws ParseError.
Document parse_document(std::string_view text);

/// Canonical N3S text: prefixes, root facts, then nested surfaces with
/// two-space indentation. parse(serialize(d)) is structurally equal to d.
std::string serialize_document(const Document& d);

/// Standard Turtle prefix/base resolution of `<ref>` or `p:local` spellings.
/// Throws ParseError (UnknownPrefix / SyntaxError).
std::string expand_iri(const std::string& name, const PrefixMap& prefixes,
                       const std::optional<std::string>& base);

/// N3S spelling of a term, compressing against the prefix map. In the
/// predicate slot rdf:type renders as `a`.
std::string render_term_n3s(const Term& t, const PrefixMap& prefixes, bool predicate_slot = false);
std::string render_triple_n3s(const Triple& t, const PrefixMap& prefixes);

/// Parses one term in object-position N3S spelling.
Term parse_term_n3s(const std::string& text, const PrefixMap& prefixes);
/// Parses a run of statements; returns the resulting items.
std::vector<SurfaceItem> parse_items_n3s(const std::string& text, const PrefixMap& prefixes);
/// `@prefix` lines for the given map (always including log:).
std::string prefix_prelude(const PrefixMap& prefixes);

} // namespace n3s
