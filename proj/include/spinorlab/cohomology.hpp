#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinorlab/types.hpp"

namespace spinorlab::cohomology {

// Finite category given by objects, morphisms with dom/cod, and a
// composition table.  Identities are located from the table; associativity
// and the identity laws are checked exhaustively at construction.
struct FiniteCategory {
  std::vector<std::string> objects;
  struct Morphism {
    std::string id;
    int dom;
    int cod;
  };
  std::vector<Morphism> morphisms;
  std::map<std::pair<int, int>, int> compose;  // (g, f) -> g after f
  std::vector<int> identity;                   // object -> morphism index

  static FiniteCategory build(std::vector<std::string> objects,
                              std::vector<std::tuple<std::string, std::string, std::string>> arrows,
                              std::vector<std::array<std::string, 3>> table);

  int object_index(const std::string& name) const;
  int morphism_index(const std::string& name) const;
  void validate() const;
};

// Nerve truncation at level 2: 0-simplices are objects, 1-simplices
// morphisms, 2-simplices composable pairs (g, f) with cod f = dom g;
// identities enter as degenerate simplices.
struct NerveTruncation {
  const FiniteCategory* cat;
  std::vector<std::pair<int, int>> pairs;  // (g, f)

  static NerveTruncation build(const FiniteCategory& cat);

  // faces of a 1-simplex: d0 = cod, d1 = dom
  int face1(int morphism, int j) const;
  // faces of a 2-simplex: d0 = g, d1 = g after f, d2 = f
  int face2(int pair, int j) const;
  std::size_t size(int level) const;
};

// GF(2) cochain at a fixed nerve level.
struct Cochain {
  int level = 0;
  std::vector<std::uint8_t> bits;
};

Cochain coboundary(const NerveTruncation& nerve, const Cochain& c);

// Bitset Gaussian elimination over GF(2).
class Gf2Matrix {
 public:
  Gf2Matrix(std::size_t rows, std::size_t cols);
  void flip(std::size_t r, std::size_t c);
  bool get(std::size_t r, std::size_t c) const;
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int rank() const;
  // Solves M t = v; returns a witness when consistent.
  std::optional<std::vector<std::uint8_t>> solve(const std::vector<std::uint8_t>& v) const;

 private:
  std::size_t rows_, cols_, words_;
  std::vector<std::uint64_t> data_;
};

Gf2Matrix d0_matrix(const NerveTruncation& nerve);  // C^0 -> C^1
Gf2Matrix d1_matrix(const NerveTruncation& nerve);  // C^1 -> C^2

struct H1Report {
  std::size_t dim_closed;  // dim ker d1
  std::size_t dim_exact;   // dim im d0
  std::size_t h1_size;     // 2^(closed - exact)
};

H1Report h1_z2(const FiniteCategory& cat);

// Exhaustive enumeration over all cochains; only for |Sigma_1| <= 16.
H1Report h1_z2_bruteforce(const FiniteCategory& cat);

struct TwistReport {
  bool closed = false;
  bool exact = false;
  // first composable pair violating functoriality when not closed
  std::optional<std::pair<std::string, std::string>> violation;
  // global sign choice with v = dt when exact
  std::optional<std::vector<std::uint8_t>> witness;
};

// Interprets a 1-cochain as a sign twist of the spinor functor: closedness is
// functoriality of the twisted assignment, exactness a global sign choice
// undoing it.
TwistReport dirac_structure_twist_demo(const FiniteCategory& cat, const Cochain& v);

// ---- stock categories ----------------------------------------------------

FiniteCategory one_object_category();
FiniteCategory arrow_category();
// one-object category of a finite abelian group given by its Cayley table
FiniteCategory group_category(const std::vector<std::string>& elems,
                              const std::vector<std::vector<int>>& cayley, int unit);
FiniteCategory z2_category();
FiniteCategory z3_category();
FiniteCategory z4_category();
FiniteCategory z2xz2_category();

// JSON loader: {"objects": [...], "morphisms": [{"id","dom","cod"}],
// "compose": [[g, f, gf]]}.
FiniteCategory category_from_json(const std::string& text);

}  // namespace spinorlab::cohomology
