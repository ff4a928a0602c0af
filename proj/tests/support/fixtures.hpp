#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "n3s/normalize.hpp"
#include "n3s/parser.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(N3S_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline n3s::Document parse_fixture(const std::string& name) {
  return n3s::parse_document(read_fixture(name));
}

inline n3s::Document prepared_fixture(const std::string& name) {
  return n3s::existential_closure(parse_fixture(name));
}

// example.org IRI shorthand used all over the tests
inline n3s::Term ex(const std::string& local) {
  return n3s::Term::iri("https://example.org/ns#" + local);
}

inline n3s::Term rdf_type() {
  return n3s::Term::iri(std::string(n3s::iri::rdf_type));
}

} // namespace testsupport
