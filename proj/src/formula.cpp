#include "t3star/formula.hpp"

#include "t3star/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <map>

namespace t3star {

const ColumnSchema* Schema::find(std::string_view name) const {
  for (const ColumnSchema& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::string> Schema::factor_names() const {
  std::vector<std::string> out;
  for (const ColumnSchema& c : columns) {
    if (c.kind == ColumnKind::factor) out.push_back(c.name);
  }
  return out;
}

namespace {

enum class Tok { ident, one, tilde, plus, colon, star, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '.' || c >= 0x80; }
bool ident_char(unsigned char c) { return ident_start(c) || std::isdigit(c); }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    switch (c) {
      case '~':
        out.push_back({Tok::tilde, "~", start});
        ++i;
        continue;
      case '+':
        out.push_back({Tok::plus, "+", start});
        ++i;
        continue;
      case ':':
        out.push_back({Tok::colon, ":", start});
        ++i;
        continue;
      case '*':
        out.push_back({Tok::star, "*", start});
        ++i;
        continue;
      case '`': {
        const std::size_t close = s.find('`', i + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated quoted name", start);
        if (close == i + 1) throw ParseError("empty quoted name", start);
        out.push_back({Tok::ident, std::string(s.substr(i + 1, close - i - 1)), start});
        i = close + 1;
        continue;
      }
      default:
        break;
    }
    if (c == '1' && (i + 1 == s.size() || !ident_char(static_cast<unsigned char>(s[i + 1])))) {
      out.push_back({Tok::one, "1", start});
      ++i;
      continue;
    }
    if (!ident_start(c)) {
      throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", start);
    }
    while (i < s.size() && ident_char(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({Tok::ident, std::string(s.substr(start, i - start)), start});
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const Schema& schema)
      : toks_(tokenize(text)), schema_(schema) {
    for (std::size_t k = 0; k < schema.columns.size(); ++k) position_[schema.columns[k].name] = k;
  }

  Formula parse() {
    Formula f;
    const Token& resp = expect(Tok::ident, "a response name");
    const ColumnSchema* rc = schema_.find(resp.text);
    if (!rc) throw ParseError("unknown column '" + resp.text + "'", resp.offset);
    if (rc->kind == ColumnKind::factor) {
      throw ParseError("response '" + resp.text + "' is not numeric", resp.offset);
    }
    f.response = resp.text;
    expect(Tok::tilde, "'~'");
    if (peek().kind == Tok::end) throw ParseError("empty term list", peek().offset);
    parse_term(f);
    while (peek().kind == Tok::plus) {
      next();
      parse_term(f);
    }
    if (peek().kind != Tok::end) throw ParseError("unexpected '" + peek().text + "'", peek().offset);
    return f;
  }

 private:
  struct Operand {
    std::vector<std::string> factors;
    std::optional<std::string> covariate;
    std::size_t offset = 0;
  };

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw ParseError(std::string("expected ") + what +
                           (peek().kind == Tok::end ? " but reached the end" : ""),
                       peek().offset);
    }
    return next();
  }

  void add_name(Operand& op, const Token& t, const std::string& response) {
    const ColumnSchema* c = schema_.find(t.text);
    if (!c) throw ParseError("unknown column '" + t.text + "'", t.offset);
    if (t.text == response) throw ParseError("response '" + t.text + "' used as a term", t.offset);
    if (c->kind == ColumnKind::factor) {
      if (std::find(op.factors.begin(), op.factors.end(), t.text) == op.factors.end()) {
        op.factors.push_back(t.text);
      }
    } else {
      if (op.covariate && *op.covariate != t.text) {
        throw ParseError("a term may hold at most one covariate", t.offset);
      }
      op.covariate = t.text;
    }
  }

  Operand parse_product(const std::string& response) {
    Operand op;
    op.offset = peek().offset;
    const Token& first = expect(Tok::ident, "a column name");
    add_name(op, first, response);
    while (peek().kind == Tok::colon) {
      next();
      if (peek().kind == Tok::one) throw ParseError("'1' cannot appear inside an interaction", peek().offset);
      add_name(op, expect(Tok::ident, "a column name"), response);
    }
    return op;
  }

  void parse_term(Formula& f) {
    if (peek().kind == Tok::one) {
      next();
      if (peek().kind == Tok::colon || peek().kind == Tok::star) {
        throw ParseError("'1' cannot appear inside an interaction", peek().offset);
      }
      return;
    }
    std::vector<Operand> ops{parse_product(f.response)};
    while (peek().kind == Tok::star) {
      next();
      if (peek().kind == Tok::one) throw ParseError("'1' cannot appear inside an interaction", peek().offset);
      ops.push_back(parse_product(f.response));
    }
    // Every non-empty subset of the '*' operands, smaller subsets first.
    const std::size_t m = ops.size();
    if (m > 16) throw ParseError("too many '*' operands", ops.front().offset);
    std::vector<std::uint32_t> subsets;
    for (std::uint32_t s = 1; s < (1u << m); ++s) subsets.push_back(s);
    std::stable_sort(subsets.begin(), subsets.end(), [](std::uint32_t a, std::uint32_t b) {
      return std::popcount(a) < std::popcount(b);
    });
    for (std::uint32_t s : subsets) {
      Operand merged;
      for (std::size_t k = 0; k < m; ++k) {
        if (!((s >> k) & 1u)) continue;
        for (const std::string& fac : ops[k].factors) {
          if (std::find(merged.factors.begin(), merged.factors.end(), fac) == merged.factors.end()) {
            merged.factors.push_back(fac);
          }
        }
        if (ops[k].covariate) {
          if (merged.covariate && *merged.covariate != *ops[k].covariate) {
            throw ParseError("a term may hold at most one covariate", ops[k].offset);
          }
          merged.covariate = ops[k].covariate;
        }
      }
      push_term(f, std::move(merged));
    }
  }

  void push_term(Formula& f, Operand op) {
    Term t;
    t.factors = std::move(op.factors);
    std::sort(t.factors.begin(), t.factors.end(),
              [&](const std::string& a, const std::string& b) { return position_.at(a) < position_.at(b); });
    t.covariate = std::move(op.covariate);
    if (std::find(f.terms.begin(), f.terms.end(), t) == f.terms.end()) f.terms.push_back(std::move(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Schema& schema_;
  std::map<std::string, std::size_t> position_;
};

EffectTuple tuple_for(const Term& t, const std::vector<std::string>& factors) {
  std::uint32_t mask = 0;
  for (const std::string& name : t.factors) {
    auto it = std::find(factors.begin(), factors.end(), name);
    if (it == factors.end()) throw InputError("factor '" + name + "' is not in the factor list");
    mask |= 1u << static_cast<unsigned>(it - factors.begin());
  }
  return EffectTuple(static_cast<int>(factors.size()), mask);
}

}  // namespace

Formula parse_formula(std::string_view text, const Schema& schema) {
  return Parser(text, schema).parse();
}

std::vector<std::string> formula_factors(const Formula& formula, const Schema& schema) {
  std::vector<std::string> out;
  for (const ColumnSchema& c : schema.columns) {
    if (c.kind != ColumnKind::factor) continue;
    for (const Term& t : formula.terms) {
      if (std::find(t.factors.begin(), t.factors.end(), c.name) != t.factors.end()) {
        out.push_back(c.name);
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> formula_covariates(const Formula& formula) {
  std::vector<std::string> out;
  for (const Term& t : formula.terms) {
    if (t.covariate && std::find(out.begin(), out.end(), *t.covariate) == out.end()) {
      out.push_back(*t.covariate);
    }
  }
  return out;
}

ModelSpec to_model_spec(const Formula& formula, const std::vector<std::string>& factors) {
  if (factors.empty()) throw InputError("the model must involve at least one factor");
  const int f = static_cast<int>(factors.size());
  ModelSpec spec;
  spec.parts.push_back({std::nullopt, {EffectTuple::intercept(f)}});
  for (const std::string& cov : formula_covariates(formula)) spec.parts.push_back({cov, {}});
  for (const Term& t : formula.terms) {
    const EffectTuple j = tuple_for(t, factors);
    CovariatePart& part = t.covariate ? spec.parts[static_cast<std::size_t>(spec.part_index(*t.covariate))]
                                      : spec.parts.front();
    if (std::find(part.effects.begin(), part.effects.end(), j) == part.effects.end()) {
      part.effects.push_back(j);
    }
  }
  for (CovariatePart& p : spec.parts) std::sort(p.effects.begin(), p.effects.end());
  return spec;
}

Formula from_model_spec(const std::string& response, const ModelSpec& spec,
                        const std::vector<std::string>& factors) {
  Formula f;
  f.response = response;
  for (const CovariatePart& part : spec.parts) {
    std::vector<EffectTuple> effects = part.effects;
    std::sort(effects.begin(), effects.end());
    for (const EffectTuple& j : effects) {
      if (!part.covariate && j.is_intercept()) continue;
      Term t;
      for (int k = 0; k < j.factor_count(); ++k) {
        if (j.has(k)) t.factors.push_back(factors.at(static_cast<std::size_t>(k)));
      }
      t.covariate = part.covariate;
      f.terms.push_back(std::move(t));
    }
  }
  return f;
}

namespace {

std::string quote_name(const std::string& name) {
  bool plain = !name.empty() && ident_start(static_cast<unsigned char>(name[0]));
  for (char c : name) plain = plain && ident_char(static_cast<unsigned char>(c));
  return plain ? name : "`" + name + "`";
}

}  // namespace

std::string term_label(const Term& term) {
  std::string s;
  if (term.covariate) s = quote_name(*term.covariate);
  for (const std::string& fac : term.factors) {
    if (!s.empty()) s += ':';
    s += quote_name(fac);
  }
  return s;
}

std::string to_string(const Formula& formula) {
  std::string s = quote_name(formula.response) + " ~ ";
  if (formula.terms.empty()) return s + "1";
  for (std::size_t i = 0; i < formula.terms.size(); ++i) {
    if (i) s += " + ";
    s += term_label(formula.terms[i]);
  }
  return s;
}

}  // namespace t3star
