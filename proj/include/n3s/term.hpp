#pragma once

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace n3s {

namespace iri {
inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view rdf_lang_string = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
inline constexpr std::string_view xsd_string = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr std::string_view xsd_double = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr std::string_view xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr std::string_view log_ns = "http://www.w3.org/2000/10/swap/log#";
inline constexpr std::string_view log_on_negative_surface = "http://www.w3.org/2000/10/swap/log#onNegativeSurface";
inline constexpr std::string_view log_on_query_surface = "http://www.w3.org/2000/10/swap/log#onQuerySurface";
} // namespace iri

enum class TermKind { Iri, BlankNode, Literal };

/// An RDF term. Immutable once built; compare with == / <.
class Term {
public:
  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical, std::string datatype = "", std::string language = "");

  TermKind kind() const { return kind_; }
  bool is_iri() const { return kind_ == TermKind::Iri; }
  bool is_blank() const { return kind_ == TermKind::BlankNode; }
  bool is_literal() const { return kind_ == TermKind::Literal; }

  /// IRI string, blank label, or literal lexical form depending on kind.
  const std::string& value() const { return value_; }
  const std::string& datatype() const { return datatype_; }
  const std::string& language() const { return language_; }

  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;

private:
  Term(TermKind kind, std::string value, std::string datatype, std::string language)
      : kind_(kind), value_(std::move(value)), datatype_(std::move(datatype)),
        language_(std::move(language)) {}

  TermKind kind_;
  std::string value_;
  std::string datatype_; // literals only
  std::string language_; // literals only
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  Triple(Term s, Term p, Term o);

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

/// Finite map from graffiti labels to terms.
using Substitution = std::map<std::string, Term>;

/// pattern-term under s: bound labels rewrite, everything else unchanged.
Term substitute(const Substitution& s, const Term& t);
Triple substitute(const Substitution& s, const Triple& t);

/// compose(a, b): apply b to a's range, then add b's bindings absent from a.
/// substitute(compose(a, b), t) == substitute(b, substitute(a, t)).
Substitution compose(const Substitution& a, const Substitution& b);

/// Debug rendering (full IRIs in <>, _:labels, quoted literals).
std::string to_string(const Term& t);
std::string to_string(const Triple& t);

} // namespace n3s
