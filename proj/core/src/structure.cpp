#include "hanf/structure.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

#include "hanf/errors.hpp"
#include "text.hpp"

namespace hanf {

Signature::Signature(std::vector<RelationSymbol> relations)
    : relations_(std::move(relations)) {
  std::set<std::string_view> seen;
  for (const auto& r : relations_) {
    if (r.name.empty()) throw Error("relation symbol with empty name");
    if (r.arity < 1) throw Error("relation '" + r.name + "' has arity 0");
    if (!seen.insert(r.name).second) throw Error("duplicate relation symbol '" + r.name + "'");
  }
}

std::optional<std::size_t> Signature::find(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Signature::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error("unknown relation symbol '" + std::string(name) + "'");
}

SignaturePtr make_signature(std::vector<RelationSymbol> relations) {
  return std::make_shared<const Signature>(std::move(relations));
}

SignaturePtr parse_signature(std::string_view text) {
  std::vector<RelationSymbol> rels;
  for (const auto& line : detail::tokenize_lines(text)) {
    if (line[0].text != "rel" || line.size() != 3) {
      throw ParseError("expected 'rel <name> <arity>'", line[0].line, line[0].column);
    }
    const auto arity = detail::parse_uint(line[2], "arity");
    if (arity < 1) throw ParseError("arity must be at least 1", line[2].line, line[2].column);
    const std::string name(line[1].text);
    for (const auto& r : rels) {
      if (r.name == name) {
        throw ParseError("duplicate relation '" + name + "'", line[1].line, line[1].column);
      }
    }
    rels.push_back({name, static_cast<std::uint32_t>(arity)});
  }
  return make_signature(std::move(rels));
}

std::string print_signature(const Signature& sig) {
  std::string out;
  for (const auto& r : sig.relations()) {
    out += "rel " + r.name + " " + std::to_string(r.arity) + "\n";
  }
  return out;
}

namespace {

void sort_unique_tuples(std::vector<Element>& flat, std::uint32_t arity) {
  const std::size_t n = flat.size() / arity;
  if (n <= 1) return;
  if (arity == 1) {
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    return;
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto less = [&](std::uint32_t x, std::uint32_t y) {
    return std::lexicographical_compare(flat.begin() + x * arity, flat.begin() + (x + 1) * arity,
                                        flat.begin() + y * arity, flat.begin() + (y + 1) * arity);
  };
  auto equal = [&](std::uint32_t x, std::uint32_t y) {
    return std::equal(flat.begin() + x * arity, flat.begin() + (x + 1) * arity,
                      flat.begin() + y * arity);
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<Element> out;
  out.reserve(flat.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && equal(order[i], order[i - 1])) continue;
    out.insert(out.end(), flat.begin() + order[i] * arity, flat.begin() + (order[i] + 1) * arity);
  }
  flat = std::move(out);
}

}  // namespace

Structure::Structure(SignaturePtr sig, std::uint32_t size,
                     std::vector<std::vector<Element>> tuples)
    : sig_(std::move(sig)), size_(size), tuples_(std::move(tuples)) {
  if (!sig_) throw Error("structure without signature");
  if (size_ == 0) throw Error("structures must have a nonempty universe");
  if (tuples_.size() != sig_->size()) {
    throw Error("structure has " + std::to_string(tuples_.size()) +
                " interpretations for a signature with " + std::to_string(sig_->size()) +
                " symbols");
  }
  for (std::size_t r = 0; r < tuples_.size(); ++r) {
    const auto k = arity(r);
    if (tuples_[r].size() % k != 0) {
      throw Error("relation '" + (*sig_)[r].name + "' has a partial tuple");
    }
    for (auto e : tuples_[r]) {
      if (e >= size_) {
        throw Error("element " + std::to_string(e) + " out of range in relation '" +
                    (*sig_)[r].name + "'");
      }
    }
    sort_unique_tuples(tuples_[r], k);
  }

  // Incidence index: each tuple listed once per distinct element it mentions.
  std::vector<std::uint32_t> inc_count(size_ + 1, 0);
  std::vector<std::pair<Element, Element>> edges;
  std::vector<Element> distinct;
  for (std::uint32_t r = 0; r < tuples_.size(); ++r) {
    const auto k = arity(r);
    const auto n = tuple_count(r);
    for (std::uint32_t t = 0; t < n; ++t) {
      distinct.assign(tuples_[r].begin() + t * k, tuples_[r].begin() + (t + 1) * k);
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (auto e : distinct) ++inc_count[e];
      for (std::size_t i = 0; i < distinct.size(); ++i) {
        for (std::size_t j = i + 1; j < distinct.size(); ++j) {
          edges.emplace_back(distinct[i], distinct[j]);
          edges.emplace_back(distinct[j], distinct[i]);
        }
      }
    }
  }
  incidence_offsets_.assign(size_ + 1, 0);
  for (std::uint32_t e = 0; e < size_; ++e) {
    incidence_offsets_[e + 1] = incidence_offsets_[e] + inc_count[e];
  }
  incidences_.resize(incidence_offsets_[size_]);
  std::vector<std::uint32_t> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (std::uint32_t r = 0; r < tuples_.size(); ++r) {
    const auto k = arity(r);
    const auto n = tuple_count(r);
    for (std::uint32_t t = 0; t < n; ++t) {
      distinct.assign(tuples_[r].begin() + t * k, tuples_[r].begin() + (t + 1) * k);
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (auto e : distinct) incidences_[fill[e]++] = Incidence{r, t};
    }
  }

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  adjacency_offsets_.assign(size_ + 1, 0);
  for (const auto& [a, b] : edges) ++adjacency_offsets_[a + 1];
  for (std::uint32_t e = 0; e < size_; ++e) adjacency_offsets_[e + 1] += adjacency_offsets_[e];
  adjacency_.reserve(edges.size());
  for (const auto& [a, b] : edges) adjacency_.push_back(b);
}

bool Structure::holds(std::size_t rel, std::span<const Element> t) const {
  const auto k = arity(rel);
  if (t.size() != k) return false;
  const auto& flat = tuples_[rel];
  std::size_t lo = 0;
  std::size_t hi = flat.size() / k;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto* p = flat.data() + mid * k;
    if (std::lexicographical_compare(p, p + k, t.begin(), t.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo < flat.size() / k && std::equal(t.begin(), t.end(), flat.data() + lo * k);
}

StructureBuilder::StructureBuilder(SignaturePtr sig, std::uint32_t size)
    : sig_(std::move(sig)), size_(size), tuples_(sig_ ? sig_->size() : 0) {}

StructureBuilder& StructureBuilder::add(std::size_t rel, std::span<const Element> tuple) {
  if (rel >= tuples_.size()) throw Error("relation index out of range");
  if (tuple.size() != (*sig_)[rel].arity) {
    throw Error("wrong arity for relation '" + (*sig_)[rel].name + "'");
  }
  tuples_[rel].insert(tuples_[rel].end(), tuple.begin(), tuple.end());
  return *this;
}

StructureBuilder& StructureBuilder::add(std::string_view rel, std::initializer_list<Element> tuple) {
  return add(sig_->index_of(rel), tuple);
}

Structure StructureBuilder::build() const { return Structure(sig_, size_, tuples_); }

namespace {

void check_element(const Structure& a, Element x) {
  if (x >= a.size()) {
    throw Error("element " + std::to_string(x) + " out of range (universe size " +
                std::to_string(a.size()) + ")");
  }
}

}  // namespace

bool gaifman_adjacent(const Structure& a, Element x, Element y) {
  check_element(a, x);
  check_element(a, y);
  if (x == y) return false;
  auto n = a.neighbors(x);
  return std::binary_search(n.begin(), n.end(), y);
}

Distance distance(const Structure& a, Element x, Element y) {
  check_element(a, x);
  check_element(a, y);
  if (x == y) return 0u;
  std::vector<std::uint32_t> dist(a.size(), std::numeric_limits<std::uint32_t>::max());
  std::queue<Element> queue;
  dist[x] = 0;
  queue.push(x);
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop();
    for (auto v : a.neighbors(u)) {
      if (dist[v] != std::numeric_limits<std::uint32_t>::max()) continue;
      dist[v] = dist[u] + 1;
      if (v == y) return dist[v];
      queue.push(v);
    }
  }
  return std::nullopt;
}

std::vector<Element> ball(const Structure& a, std::span<const Element> centers, std::uint32_t d) {
  if (centers.empty()) throw Error("ball needs at least one center");
  for (auto c : centers) check_element(a, c);
  // Breadth-first layers; the visited list stays small for bounded degree,
  // so membership is a linear scan rather than a universe-sized array.
  std::vector<Element> visited;
  std::vector<Element> frontier;
  for (auto c : centers) {
    if (std::find(visited.begin(), visited.end(), c) == visited.end()) {
      visited.push_back(c);
      frontier.push_back(c);
    }
  }
  std::vector<Element> next;
  for (std::uint32_t layer = 1; layer < d && !frontier.empty(); ++layer) {
    next.clear();
    for (auto u : frontier) {
      for (auto v : a.neighbors(u)) {
        if (std::find(visited.begin(), visited.end(), v) == visited.end()) {
          visited.push_back(v);
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
  std::sort(visited.begin(), visited.end());
  return visited;
}

std::uint32_t degree(const Structure& a) {
  std::uint32_t best = 0;
  for (Element x = 0; x < a.size(); ++x) {
    best = std::max<std::uint32_t>(best, static_cast<std::uint32_t>(a.neighbors(x).size()));
  }
  return best;
}

InducedSubstructure induced_substructure(const Structure& a, std::span<const Element> subset) {
  if (subset.empty()) throw Error("induced substructure of an empty set");
  std::vector<Element> original(subset.begin(), subset.end());
  for (auto e : original) check_element(a, e);
  std::sort(original.begin(), original.end());
  original.erase(std::unique(original.begin(), original.end()), original.end());

  auto rename = [&](Element e) -> std::optional<Element> {
    auto it = std::lower_bound(original.begin(), original.end(), e);
    if (it == original.end() || *it != e) return std::nullopt;
    return static_cast<Element>(it - original.begin());
  };

  const auto& sig = a.signature();
  std::vector<std::vector<Element>> tuples(sig.size());
  std::vector<Element> renamed;
  for (auto e : original) {
    for (const auto inc : a.incidences(e)) {
      auto t = a.tuple(inc.relation, inc.tuple);
      // Each tuple is visited once per distinct element; keep it only from
      // its smallest element.
      if (*std::min_element(t.begin(), t.end()) != e) continue;
      renamed.clear();
      bool inside = true;
      for (auto x : t) {
        auto r = rename(x);
        if (!r) {
          inside = false;
          break;
        }
        renamed.push_back(*r);
      }
      if (inside) tuples[inc.relation].insert(tuples[inc.relation].end(), renamed.begin(), renamed.end());
    }
  }
  return InducedSubstructure{
      Structure(a.signature_ptr(), static_cast<std::uint32_t>(original.size()), std::move(tuples)),
      std::move(original)};
}

Structure parse_structure(std::string_view text, SignaturePtr sig) {
  auto lines = detail::tokenize_lines(text);
  if (lines.empty()) throw ParseError("empty structure file", 1, 1);
  const auto& head = lines.front();
  if (head[0].text != "structure" || head.size() != 2) {
    throw ParseError("expected 'structure <size>'", head[0].line, head[0].column);
  }
  const auto size = detail::parse_uint(head[1], "universe size");
  if (size < 1) throw ParseError("universe must be nonempty", head[1].line, head[1].column);
  std::vector<std::vector<Element>> tuples(sig->size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    auto rel = sig->find(line[0].text);
    if (!rel) {
      throw ParseError("unknown relation symbol '" + std::string(line[0].text) + "'",
                       line[0].line, line[0].column);
    }
    const auto k = (*sig)[*rel].arity;
    if (line.size() != k + 1) {
      throw ParseError("relation '" + std::string(line[0].text) + "' has arity " +
                           std::to_string(k) + ", got " + std::to_string(line.size() - 1) +
                           " arguments",
                       line[0].line, line[0].column);
    }
    for (std::size_t j = 1; j < line.size(); ++j) {
      const auto e = detail::parse_uint(line[j], "element index");
      if (e >= size) {
        throw ParseError("element " + std::to_string(e) + " out of range", line[j].line,
                         line[j].column);
      }
      tuples[*rel].push_back(static_cast<Element>(e));
    }
  }
  return Structure(std::move(sig), static_cast<std::uint32_t>(size), std::move(tuples));
}

std::string print_structure(const Structure& a) {
  std::string out = "structure " + std::to_string(a.size()) + "\n";
  const auto& sig = a.signature();
  for (std::size_t r = 0; r < sig.size(); ++r) {
    for (std::size_t t = 0; t < a.tuple_count(r); ++t) {
      out += sig[r].name;
      for (auto e : a.tuple(r, t)) out += " " + std::to_string(e);
      out += "\n";
    }
  }
  return out;
}

}  // namespace hanf
