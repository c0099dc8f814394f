#include "hanf/sphere.hpp"

#include <algorithm>
#include <functional>

#include "hanf/errors.hpp"
#include "text.hpp"

namespace hanf {

Sphere::Sphere(Structure carrier, std::vector<Element> centers, std::uint32_t declared_radius)
    : carrier_(std::move(carrier)),
      centers_(std::move(centers)),
      declared_radius_(declared_radius) {
  if (declared_radius_ < 1) throw Error("sphere radius must be at least 1");
  if (centers_.empty()) throw Error("sphere needs at least one center");
  for (auto c : centers_) {
    if (c >= carrier_.size()) throw Error("sphere center outside the carrier");
  }
  if (ball(carrier_, centers_, declared_radius_).size() != carrier_.size()) {
    throw Error("carrier is not covered by the " + std::to_string(declared_radius_) +
                "-ball around its centers");
  }
}

Sphere::Sphere(Unchecked, Structure carrier, std::vector<Element> centers,
               std::uint32_t declared_radius)
    : carrier_(std::move(carrier)),
      centers_(std::move(centers)),
      declared_radius_(declared_radius) {}

Sphere extract_sphere(const Structure& a, std::span<const Element> centers, std::uint32_t d) {
  if (d < 1) throw Error("sphere radius must be at least 1");
  auto members = ball(a, centers, d);
  auto induced = induced_substructure(a, members);
  std::vector<Element> renamed;
  renamed.reserve(centers.size());
  for (auto c : centers) {
    auto it = std::lower_bound(induced.original.begin(), induced.original.end(), c);
    renamed.push_back(static_cast<Element>(it - induced.original.begin()));
  }
  return Sphere(Sphere::Unchecked{}, std::move(induced.structure), std::move(renamed), d);
}

namespace {

std::vector<std::uint32_t> center_distances(const Structure& a, std::span<const Element> centers) {
  constexpr auto kUnseen = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist(a.size(), kUnseen);
  std::vector<Element> frontier;
  for (auto c : centers) {
    if (dist[c] == kUnseen) {
      dist[c] = 0;
      frontier.push_back(c);
    }
  }
  std::vector<Element> next;
  while (!frontier.empty()) {
    next.clear();
    for (auto u : frontier) {
      for (auto v : a.neighbors(u)) {
        if (dist[v] == kUnseen) {
          dist[v] = dist[u] + 1;
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

}  // namespace

std::uint32_t radius_of(const Sphere& s) {
  auto dist = center_distances(s.carrier(), s.centers());
  return *std::max_element(dist.begin(), dist.end()) + 1;
}

bool is_connected(const Sphere& s) {
  const auto& a = s.carrier();
  const Element start = 0;
  auto dist = center_distances(a, std::span<const Element>(&start, 1));
  return std::none_of(dist.begin(), dist.end(),
                      [](auto v) { return v == std::numeric_limits<std::uint32_t>::max(); });
}

namespace {

/// Per-element features preserved by isomorphisms: Gaifman degree and, for
/// each relation, the number of tuples mentioning the element at each
/// position pattern.
std::vector<std::uint64_t> element_features(const Structure& a) {
  std::vector<std::uint64_t> out(a.size());
  for (Element e = 0; e < a.size(); ++e) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ a.neighbors(e).size();
    std::vector<std::uint64_t> parts;
    for (const auto inc : a.incidences(e)) {
      auto t = a.tuple(inc.relation, inc.tuple);
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == e) mask |= 1ull << i;
      }
      parts.push_back((static_cast<std::uint64_t>(inc.relation) << 32) ^ mask);
    }
    std::sort(parts.begin(), parts.end());
    for (auto p : parts) h = (h ^ p) * 0x100000001b3ull;
    out[e] = h;
  }
  return out;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

std::uint64_t sphere_invariant(const Sphere& s) {
  const auto& a = s.carrier();
  std::uint64_t h = mix(a.size(), s.n_centers());
  for (std::size_t r = 0; r < a.signature().size(); ++r) h = mix(h, a.tuple_count(r));
  auto feats = element_features(a);
  for (std::size_t i = 0; i < s.n_centers(); ++i) {
    h = mix(h, feats[s.centers()[i]]);
    for (std::size_t j = 0; j < i; ++j) h = mix(h, s.centers()[i] == s.centers()[j] ? 1 : 2);
  }
  std::sort(feats.begin(), feats.end());
  for (auto f : feats) h = mix(h, f);
  return h;
}

bool is_isomorphic(const Sphere& s, const Sphere& t) {
  if (s.n_centers() != t.n_centers()) {
    throw Error("isomorphism test between spheres with " + std::to_string(s.n_centers()) +
                " and " + std::to_string(t.n_centers()) + " centers");
  }
  if (!(s.signature() == t.signature())) {
    throw Error("isomorphism test between spheres over different signatures");
  }
  const auto& a = s.carrier();
  const auto& b = t.carrier();
  if (a.size() != b.size()) return false;
  for (std::size_t r = 0; r < a.signature().size(); ++r) {
    if (a.tuple_count(r) != b.tuple_count(r)) return false;
  }

  constexpr auto kFree = std::numeric_limits<Element>::max();
  std::vector<Element> fwd(a.size(), kFree);
  std::vector<Element> bwd(b.size(), kFree);
  for (std::size_t i = 0; i < s.n_centers(); ++i) {
    const auto x = s.centers()[i];
    const auto y = t.centers()[i];
    if (fwd[x] == kFree && bwd[y] == kFree) {
      fwd[x] = y;
      bwd[y] = x;
    } else if (fwd[x] != y || bwd[y] != x) {
      return false;
    }
  }
  const auto fa = element_features(a);
  const auto fb = element_features(b);

  // Tuples of `a` mentioning x whose entries are all mapped must hold in b.
  std::vector<Element> image;
  auto consistent = [&](Element x) {
    for (const auto inc : a.incidences(x)) {
      auto tup = a.tuple(inc.relation, inc.tuple);
      image.clear();
      bool complete = true;
      for (auto e : tup) {
        if (fwd[e] == kFree) {
          complete = false;
          break;
        }
        image.push_back(fwd[e]);
      }
      if (complete && !b.holds(inc.relation, image)) return false;
    }
    return true;
  };

  for (Element x = 0; x < a.size(); ++x) {
    if (fwd[x] != kFree && (fa[x] != fb[fwd[x]] || !consistent(x))) return false;
  }

  // Breadth-first order from the centers, with the parent used to restrict
  // candidate images to neighbours of the parent's image.
  std::vector<Element> order;
  std::vector<Element> parent;
  {
    std::vector<bool> seen(a.size(), false);
    std::vector<Element> queue;
    for (auto c : s.centers()) {
      if (!seen[c]) {
        seen[c] = true;
        queue.push_back(c);
      }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto u = queue[head];
      for (auto v : a.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
          order.push_back(v);
          parent.push_back(u);
        }
      }
    }
    if (queue.size() != a.size()) return false;
  }

  std::function<bool(std::size_t)> extend = [&](std::size_t k) -> bool {
    if (k == order.size()) return true;
    const auto x = order[k];
    for (auto y : b.neighbors(fwd[parent[k]])) {
      if (bwd[y] != kFree || fb[y] != fa[x]) continue;
      fwd[x] = y;
      bwd[y] = x;
      if (consistent(x) && extend(k + 1)) return true;
      fwd[x] = kFree;
      bwd[y] = kFree;
    }
    return false;
  };
  return extend(0);
}

std::string print_sphere(const Sphere& s) {
  std::string out = "sphere " + std::to_string(s.declared_radius()) + " " +
                    std::to_string(s.n_centers()) + " " + std::to_string(s.carrier().size()) +
                    "\n";
  for (std::size_t i = 0; i < s.n_centers(); ++i) {
    out += "center " + std::to_string(i) + " " + std::to_string(s.centers()[i]) + "\n";
  }
  auto body = print_structure(s.carrier());
  out += body.substr(body.find('\n') + 1);
  return out;
}

Sphere parse_sphere(std::string_view text, SignaturePtr sig) {
  auto lines = detail::tokenize_lines(text);
  if (lines.empty()) throw ParseError("empty sphere", 1, 1);
  const auto& head = lines.front();
  if (head[0].text != "sphere" || head.size() != 4) {
    throw ParseError("expected 'sphere <radius> <n_centers> <carrier-size>'", head[0].line,
                     head[0].column);
  }
  const auto radius = detail::parse_uint(head[1], "radius");
  const auto n = detail::parse_uint(head[2], "center count");
  const auto size = detail::parse_uint(head[3], "carrier size");
  if (radius < 1 || n < 1 || size < 1) {
    throw ParseError("sphere radius, center count and size must be positive", head[0].line,
                     head[0].column);
  }
  std::vector<Element> centers(n);
  std::vector<bool> have(n, false);
  std::string facts = "structure " + std::to_string(size) + "\n";
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line[0].text == "center") {
      if (line.size() != 3) {
        throw ParseError("expected 'center <i> <element>'", line[0].line, line[0].column);
      }
      const auto idx = detail::parse_uint(line[1], "center index");
      const auto e = detail::parse_uint(line[2], "element");
      if (idx >= n || have[idx]) {
        throw ParseError("bad or repeated center index", line[1].line, line[1].column);
      }
      if (e >= size) throw ParseError("center outside the carrier", line[2].line, line[2].column);
      have[idx] = true;
      centers[idx] = static_cast<Element>(e);
    } else {
      for (const auto& tok : line) {
        facts += tok.text;
        facts += ' ';
      }
      facts += '\n';
    }
  }
  if (std::find(have.begin(), have.end(), false) != have.end()) {
    throw ParseError("missing center line", head[0].line, head[0].column);
  }
  return Sphere(parse_structure(facts, std::move(sig)), std::move(centers),
                static_cast<std::uint32_t>(radius));
}

}  // namespace hanf
