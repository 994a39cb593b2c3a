#include "grouprl/group.hpp"

#include <algorithm>
#include <numeric>

namespace grouprl {

namespace {

// Permutations of [n] in lexicographic order; p[i] = image of i.
std::vector<std::vector<int>> all_permutations(int n, bool even_only) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    if (even_only) {
      int inversions = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (p[i] > p[j]) ++inversions;
      if (inversions % 2 != 0) continue;
    }
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

GroupTable GroupTable::cyclic(int n) {
  if (n < 2 || n > kMaxOrder)
    throw Error(ErrorCode::kInvalidArgument, "cyclic group order must be in [2, 5040]");
  GroupTable g;
  g.d_ = n;
  g.table_.resize(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      g.table_[static_cast<std::size_t>(a) * n + b] = static_cast<Elem>((a + b) % n);
  g.name_ = "Z" + std::to_string(n);
  g.description_ = "addition mod " + std::to_string(n);
  g.cyclic_ = true;
  g.finalize();
  return g;
}

GroupTable GroupTable::symmetric(int n) {
  if (n < 2 || n > 8)
    throw Error(ErrorCode::kInvalidArgument, "symmetric group degree must be in [2, 8]");
  auto perms = all_permutations(n, false);
  const int d = static_cast<int>(perms.size());
  if (d > kMaxOrder)
    throw Error(ErrorCode::kInvalidArgument, "group order exceeds table cap 5040");
  GroupTable g;
  g.d_ = d;
  g.table_.resize(static_cast<std::size_t>(d) * d);
  // index lookup by permutation
  auto index_of = [&](const std::vector<int>& p) {
    auto it = std::lower_bound(perms.begin(), perms.end(), p);
    return static_cast<Elem>(it - perms.begin());
  };
  std::vector<int> c(n);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int i = 0; i < n; ++i) c[i] = perms[a][perms[b][i]];  // (a∘b)(i) = a(b(i))
      g.table_[static_cast<std::size_t>(a) * d + b] = index_of(c);
    }
  }
  g.name_ = "S" + std::to_string(n);
  g.description_ = "all permutations of " + std::to_string(n) + " letters, lexicographic order";
  g.finalize();
  return g;
}

GroupTable GroupTable::alternating(int n) {
  if (n < 2 || n > 8)
    throw Error(ErrorCode::kInvalidArgument, "alternating group degree must be in [2, 8]");
  auto perms = all_permutations(n, true);
  const int d = static_cast<int>(perms.size());
  if (d < 2)
    throw Error(ErrorCode::kInvalidArgument, "alternating group of degree 2 is trivial");
  if (d > kMaxOrder)
    throw Error(ErrorCode::kInvalidArgument, "group order exceeds table cap 5040");
  GroupTable g;
  g.d_ = d;
  g.table_.resize(static_cast<std::size_t>(d) * d);
  auto index_of = [&](const std::vector<int>& p) {
    auto it = std::lower_bound(perms.begin(), perms.end(), p);
    return static_cast<Elem>(it - perms.begin());
  };
  std::vector<int> c(n);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int i = 0; i < n; ++i) c[i] = perms[a][perms[b][i]];
      g.table_[static_cast<std::size_t>(a) * d + b] = index_of(c);
    }
  }
  g.name_ = "A" + std::to_string(n);
  g.description_ = "even permutations of " + std::to_string(n) + " letters, lexicographic order";
  g.finalize();
  return g;
}

void GroupTable::finalize() {
  const int d = d_;
  // Latin-square check: each row and column is a permutation of [d].
  std::vector<char> seen(d);
  for (int a = 0; a < d; ++a) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int b = 0; b < d; ++b) seen[table_[static_cast<std::size_t>(a) * d + b]] = 1;
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw Error(ErrorCode::kInconsistent, "composition table row is not a permutation");
  }
  for (int b = 0; b < d; ++b) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int a = 0; a < d; ++a) seen[table_[static_cast<std::size_t>(a) * d + b]] = 1;
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw Error(ErrorCode::kInconsistent, "composition table column is not a permutation");
  }
  // identity
  bool found = false;
  for (int e = 0; e < d && !found; ++e) {
    bool ok = true;
    for (int a = 0; a < d && ok; ++a)
      ok = table_[static_cast<std::size_t>(e) * d + a] == a &&
           table_[static_cast<std::size_t>(a) * d + e] == a;
    if (ok) {
      identity_ = static_cast<Elem>(e);
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::kInconsistent, "no identity element");
  // inverses
  inverse_.assign(d, 0);
  for (int a = 0; a < d; ++a) {
    bool ok = false;
    for (int b = 0; b < d; ++b) {
      if (table_[static_cast<std::size_t>(a) * d + b] == identity_ &&
          table_[static_cast<std::size_t>(b) * d + a] == identity_) {
        inverse_[a] = static_cast<Elem>(b);
        ok = true;
        break;
      }
    }
    if (!ok) throw Error(ErrorCode::kInconsistent, "element without inverse");
  }
  // abelian flag by exhaustive check
  abelian_ = true;
  for (int a = 0; a < d && abelian_; ++a)
    for (int b = a + 1; b < d; ++b)
      if (table_[static_cast<std::size_t>(a) * d + b] !=
          table_[static_cast<std::size_t>(b) * d + a]) {
        abelian_ = false;
        break;
      }
}

std::vector<Elem> GroupTable::compose_path(std::span<const Elem> transitions, Elem y0) const {
  if (transitions.empty()) throw Error(ErrorCode::kInvalidArgument, "empty transition path");
  std::vector<Elem> states;
  states.reserve(transitions.size());
  Elem y = y0;
  for (Elem g : transitions) {
    y = act(g, y);
    states.push_back(y);
  }
  return states;
}

Elem GroupTable::fold_compose(std::span<const Elem> transitions) const {
  if (transitions.empty()) throw Error(ErrorCode::kInvalidArgument, "empty transition path");
  Elem acc = transitions[0];
  for (std::size_t i = 1; i < transitions.size(); ++i) acc = compose(transitions[i], acc);
  return acc;
}

std::optional<bool> GroupTable::simple() const {
  if (d_ > 60) return std::nullopt;
  if (d_ == 1) return false;
  // Simple iff the normal closure of every non-identity element is the whole group.
  for (int x = 0; x < d_; ++x) {
    if (x == identity_) continue;
    std::vector<char> in(d_, 0);
    std::vector<Elem> frontier;
    auto add = [&](Elem e) {
      if (!in[e]) {
        in[e] = 1;
        frontier.push_back(e);
      }
    };
    add(identity_);
    // all conjugates of x
    for (int g = 0; g < d_; ++g)
      add(compose(compose(static_cast<Elem>(g), static_cast<Elem>(x)), inverse(static_cast<Elem>(g))));
    // close under products
    bool grew = true;
    while (grew) {
      grew = false;
      const auto members = frontier;  // snapshot; closure is small for d<=60
      for (Elem a : members)
        for (Elem b : members) {
          Elem c = compose(a, b);
          if (!in[c]) {
            in[c] = 1;
            frontier.push_back(c);
            grew = true;
          }
        }
    }
    int size = 0;
    for (char v : in) size += v;
    if (size != d_) return false;  // proper nontrivial normal subgroup found
  }
  return true;
}

}  // namespace grouprl
