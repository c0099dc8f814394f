#include <unordered_map>
#include <unordered_set>

#include "hanf/formula.hpp"

namespace hanf {
namespace {

class Simplifier {
 public:
  Formula run(const Formula& f) {
    if (auto it = memo_.find(f.get()); it != memo_.end()) return it->second;
    auto out = step(f);
    memo_.emplace(f.get(), out);
    return out;
  }

 private:
  Formula step(const Formula& f) {
    switch (f->kind) {
      case Kind::True:
      case Kind::False:
      case Kind::Rel:
      case Kind::Sph:
        return f;
      case Kind::Eq:
        return f->vars[0] == f->vars[1] ? f_true() : f;
      case Kind::Hanf:
        return f->threshold == 0 ? f_true() : f;
      case Kind::Not: {
        auto c = run(f->children[0]);
        if (c->kind == Kind::True) return f_false();
        if (c->kind == Kind::False) return f_true();
        if (c->kind == Kind::Not) return c->children[0];
        return c == f->children[0] ? f : f_not(std::move(c));
      }
      case Kind::And:
      case Kind::Or: {
        const auto self = f->kind;
        const auto unit = self == Kind::And ? Kind::True : Kind::False;
        const auto zero = self == Kind::And ? Kind::False : Kind::True;
        std::vector<Formula> out;
        std::unordered_set<Formula, FormulaHash, FormulaEqual> seen;
        bool changed = false;
        auto add = [&](const Formula& c) {
          if (seen.insert(c).second) {
            out.push_back(c);
          } else {
            changed = true;
          }
        };
        for (const auto& raw : f->children) {
          auto c = run(raw);
          if (c != raw) changed = true;
          if (c->kind == zero) return self == Kind::And ? f_false() : f_true();
          if (c->kind == unit) {
            changed = true;
            continue;
          }
          if (c->kind == self) {
            changed = true;
            for (const auto& g : c->children) add(g);
          } else {
            add(c);
          }
        }
        if (out.empty()) return self == Kind::And ? f_true() : f_false();
        if (out.size() == 1) return out[0];
        if (!changed) return f;
        return self == Kind::And ? f_and(std::move(out)) : f_or(std::move(out));
      }
      case Kind::Exists:
      case Kind::Forall: {
        auto body = run(f->children[0]);
        // Universes are nonempty, so a constant body decides the quantifier.
        if (body->kind == Kind::True || body->kind == Kind::False) return body;
        if (body == f->children[0]) return f;
        return f->kind == Kind::Exists ? f_exists(f->vars[0], std::move(body))
                                       : f_forall(f->vars[0], std::move(body));
      }
    }
    return f;
  }

  std::unordered_map<const Node*, Formula> memo_;
};

}  // namespace

Formula simplify(const Formula& f) { return Simplifier().run(f); }

}  // namespace hanf
