#include <cctype>
#include <charconv>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "hanf/errors.hpp"
#include "hanf/formula.hpp"

namespace hanf {
namespace {

struct SExpr {
  bool is_list = false;
  std::string_view atom;
  std::vector<SExpr> items;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr read_top() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty formula", line_, col_);
    auto e = read();
    skip_space();
    if (pos_ < text_.size()) throw ParseError("trailing input after formula", line_, col_);
    return e;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';' || c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
    SExpr e;
    e.line = line_;
    e.column = col_;
    if (text_[pos_] == ')') throw ParseError("unexpected ')'", line_, col_);
    if (text_[pos_] == '(') {
      e.is_list = true;
      advance();
      while (true) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unclosed '('", e.line, e.column);
        if (text_[pos_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      advance();
    }
    e.atom = text_.substr(start, pos_ - start);
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

[[noreturn]] void fail(const SExpr& e, const std::string& what) {
  throw ParseError(what, e.line, e.column);
}

std::uint32_t number(const SExpr& e, const char* what) {
  if (e.is_list) fail(e, std::string("expected ") + what);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(e.atom.data(), e.atom.data() + e.atom.size(), v);
  if (ec != std::errc() || ptr != e.atom.data() + e.atom.size()) {
    fail(e, std::string("expected ") + what + ", got '" + std::string(e.atom) + "'");
  }
  return v;
}

bool is_keyword(std::string_view s) {
  static const std::unordered_set<std::string_view> words = {
      "true", "false", "rel", "eq", "not", "and", "or", "exists",
      "forall", "hanf", "sph", "sphere", "center"};
  return words.count(s) > 0;
}

Var variable(const SExpr& e) {
  if (e.is_list || e.atom.empty()) fail(e, "expected a variable");
  const auto c = static_cast<unsigned char>(e.atom[0]);
  if (!(std::isalpha(c) || c == '_')) fail(e, "variable names start with a letter or '_'");
  for (char ch : e.atom) {
    const auto u = static_cast<unsigned char>(ch);
    if (!(std::isalnum(u) || ch == '_' || ch == '\'')) {
      fail(e, "bad character in variable '" + std::string(e.atom) + "'");
    }
  }
  if (is_keyword(e.atom)) fail(e, "keyword '" + std::string(e.atom) + "' used as a variable");
  return var(e.atom);
}

class Builder {
 public:
  explicit Builder(const SignaturePtr& sig) : sig_(sig) {}

  Formula build(const SExpr& e) {
    if (!e.is_list || e.items.empty() || e.items[0].is_list) fail(e, "expected '(' keyword ...");
    const auto head = e.items[0].atom;
    const auto n = e.items.size();
    auto arity = [&](std::size_t want) {
      if (n != want + 1) {
        fail(e, "'" + std::string(head) + "' takes " + std::to_string(want) + " argument(s)");
      }
    };
    if (head == "true") {
      arity(0);
      return f_true();
    }
    if (head == "false") {
      arity(0);
      return f_false();
    }
    if (head == "rel") {
      if (n < 2 || e.items[1].is_list) fail(e, "expected (rel <name> <var>...)");
      const auto name = e.items[1].atom;
      const auto r = sig_->find(name);
      if (!r) fail(e.items[1], "unknown relation symbol '" + std::string(name) + "'");
      std::vector<Var> args;
      for (std::size_t i = 2; i < n; ++i) args.push_back(variable(e.items[i]));
      if (args.size() != (*sig_)[*r].arity) {
        fail(e, "relation " + std::string(name) + " has arity " +
                    std::to_string((*sig_)[*r].arity) + ", got " + std::to_string(args.size()));
      }
      return f_rel(static_cast<std::uint32_t>(*r), std::string(name), std::move(args));
    }
    if (head == "eq") {
      arity(2);
      return f_eq(variable(e.items[1]), variable(e.items[2]));
    }
    if (head == "not") {
      arity(1);
      return f_not(build(e.items[1]));
    }
    if (head == "and" || head == "or") {
      std::vector<Formula> children;
      for (std::size_t i = 1; i < n; ++i) children.push_back(build(e.items[i]));
      return head == "and" ? f_and(std::move(children)) : f_or(std::move(children));
    }
    if (head == "exists" || head == "forall") {
      arity(2);
      const auto v = variable(e.items[1]);
      auto body = build(e.items[2]);
      return head == "exists" ? f_exists(v, std::move(body)) : f_forall(v, std::move(body));
    }
    if (head == "hanf") {
      // (hanf <m> <witness> [(<context>...)] <sphere-block>)
      if (n != 4 && n != 5) fail(e, "expected (hanf <m> <var> [(<vars>...)] (sphere ...))");
      const auto m = number(e.items[1], "threshold");
      const auto w = variable(e.items[2]);
      std::vector<Var> context;
      if (n == 5) {
        if (!e.items[3].is_list) fail(e.items[3], "expected a list of context variables");
        for (const auto& it : e.items[3].items) context.push_back(variable(it));
      }
      auto pattern = sphere_block(e.items[n - 1]);
      if (pattern->sphere.n_centers() != context.size() + 1) {
        fail(e, "sphere has " + std::to_string(pattern->sphere.n_centers()) +
                    " centers but the atom binds " + std::to_string(context.size() + 1) +
                    " variables");
      }
      for (auto v : context) {
        if (v == w) fail(e, "witness variable also listed as a context variable");
      }
      return f_hanf(m, w, std::move(pattern), std::move(context));
    }
    if (head == "sph") {
      if (n < 3) fail(e, "expected (sph <var>... (sphere ...))");
      std::vector<Var> vars;
      for (std::size_t i = 1; i + 1 < n; ++i) vars.push_back(variable(e.items[i]));
      auto pattern = sphere_block(e.items[n - 1]);
      if (pattern->sphere.n_centers() != vars.size()) {
        fail(e, "sphere atom needs one variable per center");
      }
      return f_sph(std::move(pattern), std::move(vars));
    }
    fail(e.items[0], "unknown keyword '" + std::string(head) + "'");
  }

 private:
  PatternPtr sphere_block(const SExpr& e) {
    if (!e.is_list || e.items.size() < 4 || e.items[0].is_list || e.items[0].atom != "sphere") {
      fail(e, "expected (sphere <radius> <n_centers> <size> ...)");
    }
    const auto radius = number(e.items[1], "radius");
    const auto n = number(e.items[2], "center count");
    const auto size = number(e.items[3], "carrier size");
    if (radius < 1 || n < 1 || size < 1) fail(e, "sphere radius, center count and size must be positive");
    std::vector<Element> centers(n, 0);
    std::vector<bool> have(n, false);
    std::vector<std::vector<Element>> tuples(sig_->size());
    for (std::size_t i = 4; i < e.items.size(); ++i) {
      const auto& item = e.items[i];
      if (!item.is_list || item.items.empty() || item.items[0].is_list) fail(item, "expected a fact");
      const auto head = item.items[0].atom;
      if (head == "center") {
        if (item.items.size() != 3) fail(item, "expected (center <i> <element>)");
        const auto idx = number(item.items[1], "center index");
        const auto el = number(item.items[2], "element");
        if (idx >= n || have[idx]) fail(item.items[1], "bad or repeated center index");
        if (el >= size) fail(item.items[2], "center outside the carrier");
        have[idx] = true;
        centers[idx] = el;
        continue;
      }
      const auto r = sig_->find(head);
      if (!r) fail(item.items[0], "unknown relation symbol '" + std::string(head) + "'");
      if (item.items.size() - 1 != (*sig_)[*r].arity) fail(item, "wrong arity for " + std::string(head));
      for (std::size_t j = 1; j < item.items.size(); ++j) {
        const auto el = number(item.items[j], "element");
        if (el >= size) fail(item.items[j], "element outside the carrier");
        tuples[*r].push_back(el);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!have[i]) fail(e, "missing center " + std::to_string(i));
    }
    try {
      return make_pattern(Sphere(Structure(sig_, size, std::move(tuples)), std::move(centers), radius));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& err) {
      fail(e, err.what());
    }
  }

  const SignaturePtr& sig_;
};

/// Renames binders that shadow a free variable or an enclosing binder, or
/// that reuse a name bound elsewhere, so every binder is unique.
class Renamer {
 public:
  explicit Renamer(const Formula& f) {
    for (auto v : free_variables(f)) taken_.insert(v);
    collect(f);
  }

  Formula run(const Formula& f) { return rename(f); }

 private:
  void collect(const Formula& f) {
    for (auto v : f->vars) names_.insert(v);
    if (f->kind == Kind::Hanf) names_.insert(f->witness);
    for (const auto& c : f->children) collect(c);
  }

  Var fresh(Var base) {
    for (std::size_t i = 1;; ++i) {
      auto v = var(var_name(base) + "_" + std::to_string(i));
      if (!names_.count(v) && !taken_.count(v)) {
        names_.insert(v);
        return v;
      }
    }
  }

  Var lookup(Var v) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->first == v) return it->second;
    }
    return v;
  }

  std::vector<Var> map_vars(const std::vector<Var>& vs) const {
    std::vector<Var> out;
    out.reserve(vs.size());
    for (auto v : vs) out.push_back(lookup(v));
    return out;
  }

  Var bind(Var v) {
    auto target = taken_.count(v) ? fresh(v) : v;
    taken_.insert(target);
    scope_.emplace_back(v, target);
    return target;
  }

  Formula rename(const Formula& f) {
    switch (f->kind) {
      case Kind::True:
      case Kind::False:
        return f;
      case Kind::Rel:
        return f_rel(f->relation, f->relation_name, map_vars(f->vars));
      case Kind::Eq:
        return f_eq(lookup(f->vars[0]), lookup(f->vars[1]));
      case Kind::Sph:
        return f_sph(f->pattern, map_vars(f->vars));
      case Kind::Hanf: {
        // The witness scopes over the sphere atom only, so it never shadows.
        return f_hanf(f->threshold, f->witness, f->pattern, map_vars(f->vars));
      }
      case Kind::Not:
        return f_not(rename(f->children[0]));
      case Kind::And:
      case Kind::Or: {
        std::vector<Formula> cs;
        for (const auto& c : f->children) cs.push_back(rename(c));
        return f->kind == Kind::And ? f_and(std::move(cs)) : f_or(std::move(cs));
      }
      case Kind::Exists:
      case Kind::Forall: {
        const auto v = bind(f->vars[0]);
        auto body = rename(f->children[0]);
        scope_.pop_back();
        return f->kind == Kind::Exists ? f_exists(v, std::move(body)) : f_forall(v, std::move(body));
      }
    }
    return f;
  }

  std::unordered_set<Var> taken_;
  std::unordered_set<Var> names_;
  std::vector<std::pair<Var, Var>> scope_;
};

void print_sphere_block(const Sphere& s, std::string& out) {
  out += "(sphere " + std::to_string(s.declared_radius()) + " " + std::to_string(s.n_centers()) +
         " " + std::to_string(s.carrier().size());
  for (std::size_t i = 0; i < s.n_centers(); ++i) {
    out += " (center " + std::to_string(i) + " " + std::to_string(s.centers()[i]) + ")";
  }
  const auto& a = s.carrier();
  for (std::size_t r = 0; r < a.signature().size(); ++r) {
    for (std::size_t t = 0; t < a.tuple_count(r); ++t) {
      out += " (" + a.signature()[r].name;
      for (auto e : a.tuple(r, t)) out += " " + std::to_string(e);
      out += ")";
    }
  }
  out += ")";
}

void print(const Formula& f, bool pretty, std::size_t indent, std::string& out) {
  auto vars = [&](const std::vector<Var>& vs) {
    for (auto v : vs) {
      out += ' ';
      out += var_name(v);
    }
  };
  switch (f->kind) {
    case Kind::True:
      out += "(true)";
      return;
    case Kind::False:
      out += "(false)";
      return;
    case Kind::Rel:
      out += "(rel " + f->relation_name;
      vars(f->vars);
      out += ")";
      return;
    case Kind::Eq:
      out += "(eq";
      vars(f->vars);
      out += ")";
      return;
    case Kind::Sph:
      out += "(sph";
      vars(f->vars);
      out += ' ';
      print_sphere_block(f->pattern->sphere, out);
      out += ")";
      return;
    case Kind::Hanf:
      out += "(hanf " + std::to_string(f->threshold) + " " + var_name(f->witness) + " ";
      if (!f->vars.empty()) {
        out += "(";
        for (std::size_t i = 0; i < f->vars.size(); ++i) {
          if (i) out += ' ';
          out += var_name(f->vars[i]);
        }
        out += ") ";
      }
      print_sphere_block(f->pattern->sphere, out);
      out += ")";
      return;
    case Kind::Not:
      out += "(not ";
      print(f->children[0], pretty, indent, out);
      out += ")";
      return;
    case Kind::Exists:
    case Kind::Forall:
      out += f->kind == Kind::Exists ? "(exists " : "(forall ";
      out += var_name(f->vars[0]) + " ";
      print(f->children[0], pretty, indent, out);
      out += ")";
      return;
    case Kind::And:
    case Kind::Or:
      out += f->kind == Kind::And ? "(and" : "(or";
      for (const auto& c : f->children) {
        if (pretty) {
          out += '\n';
          out.append(indent + 2, ' ');
        } else {
          out += ' ';
        }
        print(c, pretty, indent + 2, out);
      }
      out += ")";
      return;
  }
}

}  // namespace

Formula parse_formula(std::string_view text, const SignaturePtr& sig) {
  auto tree = Reader(text).read_top();
  auto f = Builder(sig).build(tree);
  return Renamer(f).run(f);
}

std::string print_formula(const Formula& f, bool pretty) {
  std::string out;
  print(f, pretty, 0, out);
  return out;
}

}  // namespace hanf
