#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grouprl/error.hpp"

namespace grouprl {

/// Index of a group element (states are identified with elements).
using Elem = std::uint16_t;

/// A finite group given by its Cayley table, acting on itself by left
/// multiplication.  Immutable after construction; all queries are pure.
class GroupTable {
 public:
  static constexpr int kMaxOrder = 5040;  // keeps O(d^2) convolutions cheap

  static GroupTable cyclic(int n);
  static GroupTable symmetric(int n);
  static GroupTable alternating(int n);

  int order() const { return d_; }
  Elem identity() const { return identity_; }
  bool abelian() const { return abelian_; }
  bool cyclic_structure() const { return cyclic_; }
  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }

  Elem compose(Elem a, Elem b) const {  // a∘b, b applied first
    check_elem(a);
    check_elem(b);
    return table_[static_cast<std::size_t>(a) * d_ + b];
  }
  Elem inverse(Elem a) const {
    check_elem(a);
    return inverse_[a];
  }
  /// Simply-transitive action on states: act(g, y) = g∘y.
  Elem act(Elem g, Elem y) const { return compose(g, y); }

  /// States y_1..y_L visited from y0 under the given transitions.
  std::vector<Elem> compose_path(std::span<const Elem> transitions, Elem y0) const;

  /// Product g_L∘...∘g_1 (the composition applied by a full path).
  Elem fold_compose(std::span<const Elem> transitions) const;

  /// Brute-force simplicity check (normal-closure scan); nullopt above d=60.
  std::optional<bool> simple() const;

 private:
  GroupTable() = default;
  void finalize();  // derives identity, inverses, abelian flag; validates
  void check_elem(Elem a) const {
    if (a >= d_) throw Error(ErrorCode::kInvalidArgument, "element index out of range");
  }

  int d_ = 0;
  Elem identity_ = 0;
  bool abelian_ = false;
  bool cyclic_ = false;
  std::string name_;
  std::string description_;
  std::vector<Elem> table_;    // row a, col b -> a∘b
  std::vector<Elem> inverse_;
};

}  // namespace grouprl
