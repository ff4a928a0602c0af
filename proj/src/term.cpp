#include "n3s/term.hpp"

#include <cctype>

namespace n3s {

Term Term::iri(std::string value) {
  if (value.empty())
    throw std::invalid_argument("IRI term must be non-empty");
  return Term(TermKind::Iri, std::move(value), "", "");
}

Term Term::blank(std::string label) {
  if (label.empty())
    throw std::invalid_argument("blank node label must be non-empty");
  for (char c : label)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw std::invalid_argument("blank node label must not contain whitespace");
  return Term(TermKind::BlankNode, std::move(label), "", "");
}

Term Term::literal(std::string lexical, std::string datatype, std::string language) {
  if (!language.empty()) {
    if (datatype.empty())
      datatype = std::string(iri::rdf_lang_string);
    else if (datatype != iri::rdf_lang_string)
      throw std::invalid_argument("language-tagged literal must have datatype rdf:langString");
  } else if (datatype.empty()) {
    datatype = std::string(iri::xsd_string);
  }
  return Term(TermKind::Literal, std::move(lexical), std::move(datatype), std::move(language));
}

Triple::Triple(Term s, Term p, Term o)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
  if (!predicate.is_iri())
    throw std::invalid_argument("triple predicate must be an IRI");
  if (subject.is_literal())
    throw std::invalid_argument("triple subject must be an IRI or blank node");
}

Term substitute(const Substitution& s, const Term& t) {
  if (t.is_blank()) {
    auto it = s.find(t.value());
    if (it != s.end())
      return it->second;
  }
  return t;
}

Triple substitute(const Substitution& s, const Triple& t) {
  return Triple(substitute(s, t.subject), substitute(s, t.predicate), substitute(s, t.object));
}

Substitution compose(const Substitution& a, const Substitution& b) {
  Substitution out;
  for (const auto& [label, term] : a)
    out.emplace(label, substitute(b, term));
  for (const auto& [label, term] : b)
    out.emplace(label, term); // no-op where a already binds
  return out;
}

static void append_escaped(std::string& out, const std::string& s) {
  for (char c : s) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default: out += c;
    }
  }
}

std::string to_string(const Term& t) {
  switch (t.kind()) {
  case TermKind::Iri:
    return "<" + t.value() + ">";
  case TermKind::BlankNode:
    return "_:" + t.value();
  case TermKind::Literal: {
    std::string out = "\"";
    append_escaped(out, t.value());
    out += '"';
    if (!t.language().empty())
      out += "@" + t.language();
    else if (t.datatype() != iri::xsd_string)
      out += "^^<" + t.datatype() + ">";
    return out;
  }
  }
  return {};
}

std::string to_string(const Triple& t) {
  return to_string(t.subject) + " " + to_string(t.predicate) + " " + to_string(t.object) + " .";
}

} // namespace n3s
