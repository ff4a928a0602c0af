// n3s: parse, reason over, query, and prove RDF Surfaces documents.
//
// Exit codes: 0 ok/proved, 1 parse/usage, 2 fuse, 3 limit, 4 no-query,
// 5 not-proved/invalid, 6 too-large.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "n3s/calculus.hpp"
#include "n3s/normalize.hpp"
#include "n3s/oracle.hpp"
#include "n3s/parser.hpp"
#include "n3s/query.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitFuse = 2;
constexpr int kExitLimit = 3;
constexpr int kExitNoQuery = 4;
constexpr int kExitNotProved = 5;
constexpr int kExitTooLarge = 6;

struct Options {
  std::vector<std::string> inputs;
  std::string limits_spec;
  std::string output_format; // n3s | turtle | trace-text (per-command default)
  int verbosity = 0;
  bool trace_to_stdout = false;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

n3s::Limits parse_limits(const std::string& spec) {
  n3s::Limits limits;
  std::string source = spec;
  if (source.empty())
    if (const char* env = std::getenv("N3S_LIMITS"))
      source = env;
  size_t pos = 0;
  while (pos < source.size()) {
    size_t comma = source.find(',', pos);
    std::string part = source.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
    pos = comma == std::string::npos ? source.size() : comma + 1;
    if (part.empty())
      continue;
    auto eq = part.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("bad --limits entry '" + part + "' (want key=value)");
    std::string key = part.substr(0, eq);
    int value = std::stoi(part.substr(eq + 1));
    if (key == "iters")
      limits.max_iterations = value;
    else if (key == "blanks")
      limits.max_fresh_blanks = value;
    else if (key == "depth")
      limits.max_depth = value;
    else
      throw std::runtime_error("unknown --limits key '" + key + "'");
  }
  return limits;
}

n3s::Document load_document(const std::string& path) {
  std::string text = read_input(path);
  try {
    return n3s::parse_document(text);
  } catch (const n3s::ParseError& e) {
    std::cerr << path << ":" << e.span().line << ":" << e.span().column << ": "
              << n3s::to_string(e.kind()) << ": " << e.message() << "\n";
    throw;
  }
}

// Parse all inputs, report scope warnings, close, and merge.
n3s::Document prepare(const std::vector<std::string>& inputs, int verbosity) {
  std::vector<n3s::Document> docs;
  for (const auto& path : inputs)
    docs.push_back(load_document(path));
  for (size_t i = 0; i < docs.size(); ++i) {
    n3s::ScopedDocument scoped = n3s::resolve_scopes(docs[i]);
    for (const auto& warning : scoped.warnings)
      std::cerr << inputs[i] << ": warning: " << warning << "\n";
    docs[i] = n3s::existential_closure(docs[i]);
  }
  n3s::Document merged = docs[0];
  n3s::FreshLabelSource merge_fresh("m");
  for (size_t i = 1; i < docs.size(); ++i)
    merged = n3s::merge_documents(merged, docs[i], merge_fresh);
  if (verbosity > 1)
    std::cerr << "merged " << docs.size() << " document(s)\n";
  return merged;
}

std::string render_derived(const n3s::DerivationTrace& trace, const n3s::PrefixMap& prefixes) {
  n3s::QueryResult wrapper;
  for (const auto& item : trace.produced)
    if (item.is_fact())
      wrapper.answers.push_back(n3s::QueryAnswer{{}, {item.fact()}});
  return n3s::render_answers(wrapper, prefixes);
}

void print_trace(const n3s::DerivationTrace& trace, const n3s::PrefixMap& prefixes,
                 const Options& opt) {
  if (opt.verbosity < 1)
    return;
  (opt.trace_to_stdout ? std::cout : std::cerr) << n3s::format_trace(trace, prefixes);
}

void print_fuse(const n3s::FuseReport& fuse, const n3s::PrefixMap& prefixes) {
  std::cerr << "inference fuse: negative surface at " << n3s::format_path(fuse.surface_path)
            << " emptied under " << n3s::format_substitution(fuse.subst, prefixes) << " (step "
            << fuse.trace_index << ")\n";
}

int cmd_parse(const Options& opt) {
  if (opt.inputs.size() == 1) {
    std::cout << n3s::serialize_document(load_document(opt.inputs[0]));
    return kExitOk;
  }
  std::cout << n3s::serialize_document(prepare(opt.inputs, opt.verbosity));
  return kExitOk;
}

int cmd_reason(const Options& opt) {
  n3s::Document kb = prepare(opt.inputs, opt.verbosity);
  n3s::Limits limits = parse_limits(opt.limits_spec);
  n3s::FreshLabelSource fresh;
  n3s::SaturationResult sat = n3s::saturate(kb, limits, fresh);
  print_trace(sat.trace, kb.prefixes, opt);
  switch (sat.outcome) {
  case n3s::SaturationOutcome::Fused:
    print_fuse(*sat.trace.fuse, kb.prefixes);
    return kExitFuse;
  case n3s::SaturationOutcome::LimitExceeded:
    std::cerr << "limit exceeded after " << sat.trace.steps.size() << " rule applications\n";
    return kExitLimit;
  case n3s::SaturationOutcome::Completed:
    if (opt.output_format == "trace-text") {
      std::cout << n3s::format_trace(sat.trace, kb.prefixes);
    } else if (opt.output_format == "n3s") {
      // derived items verbatim, including narrowed surfaces
      for (const auto& item : sat.trace.produced)
        std::cout << n3s::format_item(item, kb.prefixes) << "\n";
    } else {
      std::cout << render_derived(sat.trace, kb.prefixes);
    }
    return kExitOk;
  }
  return kExitOk;
}

int cmd_query(const Options& opt) {
  n3s::Document kb = prepare(opt.inputs, opt.verbosity);
  n3s::Limits limits = parse_limits(opt.limits_spec);
  try {
    n3s::QueryResult result = n3s::answer_query_surfaces(kb, limits);
    print_trace(result.trace, kb.prefixes, opt);
    if (result.outcome == n3s::SaturationOutcome::Fused) {
      print_fuse(*result.fuse, kb.prefixes);
      std::cerr << "counter example bindings: "
                << n3s::format_substitution(result.fuse->subst, kb.prefixes) << "\n";
      return kExitFuse;
    }
    if (opt.output_format == "trace-text")
      std::cout << n3s::format_trace(result.trace, kb.prefixes);
    else
      std::cout << n3s::render_answers(result, kb.prefixes);
    if (result.outcome == n3s::SaturationOutcome::LimitExceeded) {
      std::cerr << "limit exceeded; answers may be incomplete\n";
      return kExitLimit;
    }
    return kExitOk;
  } catch (const n3s::QueryError&) {
    std::cerr << "no query surface present in the inputs\n";
    return kExitNoQuery;
  }
}

int cmd_prove(const Options& opt, const std::string& goal_path, const std::string& mode) {
  n3s::Document kb = prepare(opt.inputs, opt.verbosity);
  n3s::Limits limits = parse_limits(opt.limits_spec);
  n3s::Goal goal = n3s::goal_from_document(load_document(goal_path));
  n3s::ProofResult result = mode == "negation"
                                ? n3s::prove_by_negation(kb, goal, limits)
                                : n3s::prove_by_contradiction(kb, goal, limits);
  print_trace(result.trace, kb.prefixes, opt);
  switch (result.verdict) {
  case n3s::Verdict::Proved:
    std::cout << "proved\n";
    return kExitOk;
  case n3s::Verdict::NotProved:
    std::cout << "not proved\n";
    return kExitNotProved;
  case n3s::Verdict::Unknown:
    std::cout << "unknown (limit exceeded)\n";
    return kExitLimit;
  }
  return kExitNotProved;
}

int cmd_check_proof(const Options& opt, const std::string& script_path) {
  n3s::Document kb = prepare(opt.inputs, opt.verbosity);
  std::string script_text = read_input(script_path);
  std::vector<n3s::RuleApplication> steps;
  try {
    steps = n3s::parse_proof_script(script_text, kb.prefixes);
  } catch (const n3s::ParseError& e) {
    std::cerr << script_path << ":" << e.span().line << ": " << e.message() << "\n";
    return kExitParse;
  }
  n3s::ProofCheck check = n3s::check_proof(kb, steps);
  if (check.ok) {
    std::cout << "valid (" << steps.size() << " steps)\n";
    return kExitOk;
  }
  std::cout << "invalid at step " << *check.failed_step << "\n";
  return kExitNotProved;
}

int cmd_oracle(const Options& opt, const std::string& goal_path, int domain, bool force) {
  n3s::Document kb = prepare(opt.inputs, opt.verbosity);
  n3s::Document goal_doc = n3s::existential_closure(load_document(goal_path));
  int next_var = 0;
  n3s::FormulaPtr goal = n3s::to_formula_offset(goal_doc, next_var);
  try {
    n3s::EntailResult result = n3s::entails(kb, goal, domain, force);
    if (result.verdict == n3s::EntailVerdict::EntailedAtK) {
      std::cout << "entailed-at-" << result.k << "\n";
      return kExitOk;
    }
    std::cout << "not-entailed (counter-model at domain size " << result.k << ")\n";
    n3s::Vocabulary vocab = n3s::vocabulary_of(
        n3s::f_and({n3s::to_formula(kb), n3s::f_not(goal)}));
    std::cout << n3s::describe(*result.counter_model, vocab);
    return kExitNotProved;
  } catch (const n3s::TooLargeError& e) {
    std::cerr << e.what() << "\n";
    return kExitTooLarge;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"RDF Surfaces (N3S) parser and reasoner"};
  app.require_subcommand(1);

  Options opt;
  std::string goal_path, mode = "contradiction", script_path;
  int domain = 3;
  bool force = false;

  app.add_option("--limits", opt.limits_spec, "iters=N,blanks=N,depth=N");
  app.add_option("--output-format", opt.output_format,
                 "n3s | turtle | trace-text (default depends on the command)")
      ->check(CLI::IsMember({"n3s", "turtle", "trace-text"}));
  app.add_flag("-v,--verbose", opt.verbosity, "print traces and diagnostics");
  app.add_flag("--trace-to-stdout", opt.trace_to_stdout, "send traces to stdout");

  auto add_common = [&](CLI::App* cmd, bool needs_input = true) {
    cmd->fallthrough(); // --limits and friends live on the top-level app
    auto* inputs = cmd->add_option("inputs", opt.inputs, "input .n3s files ('-' for stdin)");
    if (needs_input)
      inputs->required();
  };

  CLI::App* parse_cmd = app.add_subcommand("parse", "parse and echo canonical N3S");
  add_common(parse_cmd);
  CLI::App* reason_cmd = app.add_subcommand("reason", "saturate and print derived triples");
  add_common(reason_cmd);
  CLI::App* query_cmd = app.add_subcommand("query", "answer query surfaces");
  add_common(query_cmd);
  CLI::App* prove_cmd = app.add_subcommand("prove", "prove a goal graph");
  add_common(prove_cmd);
  prove_cmd->add_option("--goal", goal_path, "goal document")->required();
  prove_cmd->add_option("--mode", mode, "contradiction|negation")
      ->check(CLI::IsMember({"contradiction", "negation"}));
  CLI::App* check_cmd = app.add_subcommand("check-proof", "replay a proof script");
  add_common(check_cmd);
  check_cmd->add_option("--script", script_path, "proof script")->required();
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "finite-model entailment check");
  add_common(oracle_cmd);
  oracle_cmd->add_option("--goal", goal_path, "goal document")->required();
  oracle_cmd->add_option("--domain", domain, "maximum domain size (default 3)");
  oracle_cmd->add_flag("--force", force, "override the size guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (parse_cmd->parsed())
      return cmd_parse(opt);
    if (reason_cmd->parsed())
      return cmd_reason(opt);
    if (query_cmd->parsed())
      return cmd_query(opt);
    if (prove_cmd->parsed())
      return cmd_prove(opt, goal_path, mode);
    if (check_cmd->parsed())
      return cmd_check_proof(opt, script_path);
    if (oracle_cmd->parsed())
      return cmd_oracle(opt, goal_path, domain, force);
  } catch (const n3s::ParseError&) {
    return kExitParse; // already reported by load_document
  } catch (const n3s::NormalizeError& e) {
    std::cerr << "merge error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}
