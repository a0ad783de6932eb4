#include "fjv/smt.hpp"

#include <chrono>
#include <sstream>

namespace fjv {

namespace {

std::string var(const char* prefix, Index i) { return std::string(prefix) + "_" + std::to_string(i); }
std::string var(const char* prefix, Index i, int t) {
  return std::string(prefix) + "_" + std::to_string(i) + "_" + std::to_string(t);
}

std::string selection(const std::string& selector, const std::vector<int>& options) {
  if (options.size() == 1) return "(= " + selector + " " + std::to_string(options[0]) + ")";
  std::string out = "(or";
  for (int k : options) out += " (= " + selector + " " + std::to_string(k) + ")";
  return out + ")";
}

// Nested ite over the options, last option as the default branch.
std::string choose(const std::string& selector, const std::vector<int>& options,
                   const std::vector<std::string>& terms) {
  std::string out = terms.back();
  for (std::size_t k = options.size() - 1; k-- > 0;) {
    out = "(ite (= " + selector + " " + std::to_string(options[k]) + ") " + terms[k] + " " + out + ")";
  }
  return out;
}

std::string update_term(const Rational& lambda, const std::string& mixed, const std::string& anchor) {
  if (lambda == 0) return mixed;
  if (lambda == 1) return anchor;
  return "(+ (* " + smt_real(1 - lambda) + " " + mixed + ") (* " + smt_real(lambda) + " " + anchor + "))";
}

}  // namespace

std::string smt_real(const Rational& q) {
  if (q < 0) return "(- " + smt_real(Rational(-q)) + ")";
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  if (den == 1) return num.str() + ".0";
  return "(/ " + num.str() + ".0 " + den.str() + ".0)";
}

Encoding make_encoding(const VerificationProblem& problem, ToleranceMode mode,
                       const std::optional<LambdaBound>& bound) {
  problem.validate();
  Encoding enc;
  const Index n = problem.agents();
  for (Index i = 0; i < n; ++i) {
    Encoding::Agent a;
    a.init_options = problem.space.init_options(i);
    a.lambda_options = problem.space.lambda_options(i);
    for (int k : a.init_options) a.init_values.push_back(problem.grid.init_value(k));
    for (int k : a.lambda_options) a.lambda_values.push_back(problem.grid.level_value(k));
    a.observed = static_cast<int>(i);
    enc.agents.push_back(std::move(a));
  }
  enc.w = problem.grid.w_ab.matrix();
  enc.gamma = exact_gamma(problem.gamma);
  enc.horizon = problem.horizon();
  enc.d_lambda = problem.grid.d_lambda;
  enc.observations = problem.spec.observed;
  enc.budgets.assign(static_cast<std::size_t>(enc.horizon) + 1, tolerance_budget(problem, mode));
  if (bound) {
    if (bound->lambda_hat.size() != n) throw DimensionError("lambda_hat has wrong length");
    if (bound->eps < 0) throw DomainError("eps_lambda must be nonnegative");
  }
  enc.lambda_bound = bound;
  return enc;
}

std::string encode_body(const Encoding& enc) {
  const Index n = enc.size();
  const int horizon = enc.horizon;
  if (enc.w.rows() != n || enc.w.cols() != n) throw DimensionError("encoding: weight matrix size");
  if (enc.budgets.size() != static_cast<std::size_t>(horizon) + 1 ||
      enc.observations.size() != static_cast<std::size_t>(horizon) + 1) {
    throw DimensionError("encoding: per-step data does not match the horizon");
  }
  std::ostringstream out;
  out << "(set-logic QF_LIRA)\n";

  for (Index i = 0; i < n; ++i) {
    const auto& a = enc.agents[static_cast<std::size_t>(i)];
    if (a.init_options.empty() || a.init_options.size() != a.init_values.size() ||
        a.lambda_options.empty() || a.lambda_options.size() != a.lambda_values.size()) {
      throw DomainError("encoding: agent " + std::to_string(i) + " has malformed options");
    }
    if (a.selectable) {
      out << "(declare-const " << var("init", i) << " Int)\n";
      out << "(declare-const " << var("lam", i) << " Int)\n";
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (int t = 0; t <= horizon; ++t) out << "(declare-const " << var("x", i, t) << " Real)\n";
  }
  for (Index i = 0; i < n; ++i) {
    if (enc.agents[static_cast<std::size_t>(i)].observed < 0) continue;
    for (int t = 0; t <= horizon; ++t) out << "(declare-const " << var("b", i, t) << " Bool)\n";
  }

  // Selector domains and initial opinions.
  for (Index i = 0; i < n; ++i) {
    const auto& a = enc.agents[static_cast<std::size_t>(i)];
    if (!a.selectable) {
      out << "(assert (= " << var("x", i, 0) << " " << smt_real(a.init_values[0]) << "))\n";
      continue;
    }
    out << "(assert " << selection(var("init", i), a.init_options) << ")\n";
    out << "(assert " << selection(var("lam", i), a.lambda_options) << ")\n";
    std::vector<std::string> values;
    for (const auto& v : a.init_values) values.push_back(smt_real(v));
    out << "(assert (= " << var("x", i, 0) << " " << choose(var("init", i), a.init_options, values)
        << "))\n";
  }

  if (enc.lambda_bound) {
    const Rational d(enc.d_lambda);
    for (Index i = 0; i < n; ++i) {
      if (!enc.agents[static_cast<std::size_t>(i)].selectable) continue;
      // |lam_i / d - hat| <= eps  <=>  d (hat - eps) <= lam_i <= d (hat + eps)
      const Rational hat = enc.lambda_bound->lambda_hat(i);
      const Rational& eps = enc.lambda_bound->eps;
      out << "(assert (<= " << smt_real(d * (hat - eps)) << " (to_real " << var("lam", i) << ")))\n";
      out << "(assert (<= (to_real " << var("lam", i) << ") " << smt_real(d * (hat + eps)) << "))\n";
    }
  }

  // Unrolled dynamics.
  for (int t = 0; t < horizon; ++t) {
    for (Index i = 0; i < n; ++i) {
      const auto& a = enc.agents[static_cast<std::size_t>(i)];
      const std::string anchor = var("x", i, 0);
      const std::string next = var("x", i, t + 1);
      std::vector<std::string> terms;
      for (Index j = 0; j < n; ++j) {
        const Rational& wij = enc.w(i, j);
        if (wij == 0) continue;
        terms.push_back(wij == 1 ? var("x", j, t) : "(* " + smt_real(wij) + " " + var("x", j, t) + ")");
      }
      std::string mixed;
      if (terms.empty()) mixed = "0.0";
      else if (terms.size() == 1) mixed = terms[0];
      else {
        mixed = "(+";
        for (const auto& term : terms) mixed += " " + term;
        mixed += ")";
      }
      if (!a.selectable || a.lambda_options.size() == 1) {
        out << "(assert (= " << next << " " << update_term(a.lambda_values[0], mixed, anchor) << "))\n";
        continue;
      }
      std::vector<std::string> branches;
      for (const auto& l : a.lambda_values) branches.push_back(update_term(l, "s", anchor));
      out << "(assert (let ((s " << mixed << ")) (= " << next << " "
          << choose(var("lam", i), a.lambda_options, branches) << ")))\n";
    }
  }

  // Outputs and per-step mismatch budgets.
  const std::string gamma = smt_real(enc.gamma);
  for (Index i = 0; i < n; ++i) {
    if (enc.agents[static_cast<std::size_t>(i)].observed < 0) continue;
    for (int t = 0; t <= horizon; ++t) {
      out << "(assert (= " << var("b", i, t) << " (>= " << var("x", i, t) << " " << gamma << ")))\n";
    }
  }
  for (int t = 0; t <= horizon; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const std::int64_t budget = enc.budgets[ut];
    std::vector<std::pair<Index, int>> observed;  // agent, observed bit
    for (Index i = 0; i < n; ++i) {
      const int col = enc.agents[static_cast<std::size_t>(i)].observed;
      if (col >= 0) observed.emplace_back(i, enc.observations[ut](col));
    }
    if (budget < 0) {
      out << "(assert false)\n";
      continue;
    }
    if (budget >= static_cast<std::int64_t>(observed.size())) continue;
    if (budget == 0) {
      for (const auto& [i, bit] : observed) {
        out << "(assert " << (bit ? var("b", i, t) : "(not " + var("b", i, t) + ")") << ")\n";
      }
      continue;
    }
    out << "(assert (<= (+";
    for (const auto& [i, bit] : observed) {
      out << " (ite " << var("b", i, t) << (bit ? " 0 1)" : " 1 0)");
    }
    out << ") " << budget << "))\n";
  }
  return out.str();
}

std::string encode_script(const Encoding& encoding) {
  return encode_body(encoding) + "(check-sat)\n(get-model)\n";
}

std::string encode_smtlib(const VerificationProblem& problem, ToleranceMode mode,
                          const std::optional<LambdaBound>& bound) {
  return encode_script(make_encoding(problem, mode, bound));
}

namespace {

class SExprParser {
 public:
  explicit SExprParser(std::string_view text) : text_(text) {}

  std::vector<SExpr> all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(one());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("s-expression: " + what + " at offset " + std::to_string(pos_));
  }

  SExpr one() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == ')') fail("unbalanced ')'");
    SExpr e;
    if (c == '(') {
      ++pos_;
      while (true) {
        skip();
        if (pos_ >= text_.size()) fail("unterminated list");
        if (text_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(one());
      }
    }
    e.is_atom = true;
    if (c == '"' || c == '|') {
      const char close = c;
      const std::size_t start = pos_++;
      while (pos_ < text_.size() && text_[pos_] != close) ++pos_;
      if (pos_ >= text_.size()) fail("unterminated literal");
      ++pos_;
      e.atom = std::string(text_.substr(start, pos_ - start));
      return e;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (d == '(' || d == ')' || d == ' ' || d == '\t' || d == '\n' || d == '\r' || d == ';') break;
      ++pos_;
    }
    e.atom = std::string(text_.substr(start, pos_ - start));
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<BigInt> integer_value(const SExpr& e) {
  if (e.is_atom) {
    if (e.atom.empty() || e.atom.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    const auto first = e.atom.find_first_not_of('0');
    return BigInt(first == std::string::npos ? std::string("0") : e.atom.substr(first));
  }
  if (e.list.size() == 2 && e.list[0].is_atom && e.list[0].atom == "-") {
    if (auto v = integer_value(e.list[1])) return BigInt(-*v);
  }
  return std::nullopt;
}

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) { return SExprParser(text).all(); }

std::map<std::string, BigInt> integer_assignments(std::string_view text) {
  const auto top = parse_sexprs(text);
  std::map<std::string, BigInt> out;
  for (const SExpr& block : top) {
    if (block.is_atom) continue;
    for (const SExpr& entry : block.list) {
      if (entry.is_atom) continue;
      const auto& l = entry.list;
      // (define-fun name () Int value)
      if (l.size() == 5 && l[0].is_atom && l[0].atom == "define-fun" && l[1].is_atom &&
          l[3].is_atom && l[3].atom == "Int") {
        if (auto v = integer_value(l[4])) out[l[1].atom] = *v;
      } else if (l.size() == 2 && l[0].is_atom) {  // (name value)
        if (auto v = integer_value(l[1])) out[l[0].atom] = *v;
      }
    }
  }
  return out;
}

AbstractConfig read_selectors(const std::map<std::string, BigInt>& values, Index n) {
  AbstractConfig config;
  for (Index i = 0; i < n; ++i) {
    for (const char* prefix : {"init", "lam"}) {
      const auto it = values.find(var(prefix, i));
      if (it == values.end()) throw ParseError("model has no value for " + var(prefix, i));
      if (it->second < 0 || it->second > 1'000'000'000) {
        throw ParseError("selector " + var(prefix, i) + " out of range");
      }
      const int v = it->second.convert_to<int>();
      (prefix[0] == 'i' ? config.init_indices : config.lambda_levels).push_back(v);
    }
  }
  return config;
}

AbstractConfig parse_model(std::string_view model_text, const VerificationProblem& problem,
                           ToleranceMode mode) {
  const AbstractConfig config = read_selectors(integer_assignments(model_text), problem.agents());
  validate_witness(problem, config, mode);
  return config;
}

namespace {

std::string selector_terms(Index n) {
  std::string terms;
  for (Index i = 0; i < n; ++i) terms += (i ? " " : "") + var("init", i) + " " + var("lam", i);
  return terms;
}

std::string blocking_clause(const AbstractConfig& c) {
  std::string out = "(assert (not (and";
  for (Index i = 0; i < c.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out += " (= " + var("init", i) + " " + std::to_string(c.init_indices[k]) + ")";
    out += " (= " + var("lam", i) + " " + std::to_string(c.lambda_levels[k]) + ")";
  }
  return out + ")))\n";
}

}  // namespace

Verdict smt_verify(const VerificationProblem& problem, ToleranceMode mode, const SmtOptions& options) {
  Verdict verdict;
  verdict.engine = Engine::Smt;
  if (!options.filter) {
    const SolverResult r = run_solver(encode_smtlib(problem, mode), options.solver);
    verdict.solve_seconds = r.seconds;
    switch (r.status) {
      case SolverStatus::Sat:
        verdict.status = Status::Consistent;
        verdict.witnesses.push_back(parse_model(r.model, problem, mode));
        verdict.solution_count = 1;
        break;
      case SolverStatus::Unsat:
        verdict.status = Status::Inconsistent;
        verdict.count_complete = true;
        break;
      case SolverStatus::Unknown:
        verdict.status = Status::Inconclusive;
        verdict.notes.push_back(r.timed_out ? "solver timed out" : "solver returned unknown");
        break;
    }
    return verdict;
  }

  // Filtered search: block rejected witnesses until one passes.
  SolverSession session(options.solver);
  session.send(encode_body(make_encoding(problem, mode)));
  const std::string terms = selector_terms(problem.agents());
  for (std::size_t attempt = 0; attempt < options.max_filter_attempts; ++attempt) {
    const SolverStatus s = session.check_sat();
    if (s == SolverStatus::Unsat) {
      verdict.status = Status::Inconsistent;
      verdict.count_complete = true;
      return verdict;
    }
    if (s == SolverStatus::Unknown) {
      verdict.status = Status::Inconclusive;
      verdict.notes.push_back("solver timed out or returned unknown");
      return verdict;
    }
    const AbstractConfig c = read_selectors(integer_assignments(session.get_value(terms)), problem.agents());
    validate_witness(problem, c, mode);
    if (options.filter(c)) {
      verdict.status = Status::Consistent;
      verdict.witnesses.push_back(c);
      verdict.solution_count = 1;
      return verdict;
    }
    session.send(blocking_clause(c));
  }
  verdict.status = Status::Inconclusive;
  verdict.notes.push_back("filter rejected " + std::to_string(options.max_filter_attempts) + " witnesses");
  return verdict;
}

CountResult smt_count(const VerificationProblem& problem, ToleranceMode mode,
                      const std::optional<LambdaBound>& bound, const SolverOptions& options,
                      std::uint64_t limit) {
  const auto start = std::chrono::steady_clock::now();
  VerificationProblem gate = problem;
  if (bound) gate.space = restrict_lambda(problem, bound->lambda_hat, bound->eps);

  CountResult result;
  SolverSession session(options);
  session.send(encode_body(make_encoding(problem, mode, bound)));
  const std::string terms = selector_terms(problem.agents());
  while (result.count < limit) {
    const SolverStatus s = session.check_sat();
    if (s == SolverStatus::Unsat) {
      result.complete = true;
      break;
    }
    if (s == SolverStatus::Unknown) break;
    const AbstractConfig c = read_selectors(integer_assignments(session.get_value(terms)), problem.agents());
    validate_witness(gate, c, mode);
    ++result.count;
    session.send(blocking_clause(c));
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace fjv
