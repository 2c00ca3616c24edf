#include "spinorlab/cohomology.hpp"

#include <algorithm>
#include <tuple>

#include "json.hpp"

namespace spinorlab::cohomology {

int FiniteCategory::object_index(const std::string& name) const {
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i] == name) return static_cast<int>(i);
  throw ConfigError("unknown object: " + name);
}

int FiniteCategory::morphism_index(const std::string& name) const {
  for (std::size_t i = 0; i < morphisms.size(); ++i)
    if (morphisms[i].id == name) return static_cast<int>(i);
  throw ConfigError("unknown morphism: " + name);
}

FiniteCategory FiniteCategory::build(
    std::vector<std::string> objects,
    std::vector<std::tuple<std::string, std::string, std::string>> arrows,
    std::vector<std::array<std::string, 3>> table) {
  FiniteCategory cat;
  cat.objects = std::move(objects);
  for (const auto& [id, dom, cod] : arrows)
    cat.morphisms.push_back({id, cat.object_index(dom), cat.object_index(cod)});
  for (const auto& row : table) {
    const int gi = cat.morphism_index(row[0]);
    const int fi = cat.morphism_index(row[1]);
    const int hi = cat.morphism_index(row[2]);
    cat.compose[{gi, fi}] = hi;
  }
  // locate identities from the table
  cat.identity.assign(cat.objects.size(), -1);
  for (std::size_t m = 0; m < cat.morphisms.size(); ++m) {
    const auto& e = cat.morphisms[m];
    if (e.dom != e.cod) continue;
    bool is_id = true;
    for (std::size_t f = 0; f < cat.morphisms.size() && is_id; ++f) {
      if (cat.morphisms[f].cod == e.dom) {
        const auto it = cat.compose.find({static_cast<int>(m), static_cast<int>(f)});
        if (it == cat.compose.end() || it->second != static_cast<int>(f)) is_id = false;
      }
      if (cat.morphisms[f].dom == e.dom) {
        const auto it = cat.compose.find({static_cast<int>(f), static_cast<int>(m)});
        if (it == cat.compose.end() || it->second != static_cast<int>(f)) is_id = false;
      }
    }
    if (is_id) cat.identity[e.dom] = static_cast<int>(m);
  }
  cat.validate();
  return cat;
}

void FiniteCategory::validate() const {
  for (std::size_t o = 0; o < objects.size(); ++o)
    if (identity[o] < 0) throw ConfigError("object without identity: " + objects[o]);
  const int nm = static_cast<int>(morphisms.size());
  for (int g = 0; g < nm; ++g)
    for (int f = 0; f < nm; ++f) {
      const bool composable = morphisms[f].cod == morphisms[g].dom;
      const auto it = compose.find({g, f});
      if (composable != (it != compose.end()))
        throw ConfigError("composition table does not match dom/cod");
      if (composable) {
        const auto& gf = morphisms[it->second];
        if (gf.dom != morphisms[f].dom || gf.cod != morphisms[g].cod)
          throw ConfigError("composite has wrong endpoints");
      }
    }
  // associativity on all composable triples
  for (int h = 0; h < nm; ++h)
    for (int g = 0; g < nm; ++g) {
      if (morphisms[g].cod != morphisms[h].dom) continue;
      const int hg = compose.at({h, g});
      for (int f = 0; f < nm; ++f) {
        if (morphisms[f].cod != morphisms[g].dom) continue;
        const int gf = compose.at({g, f});
        if (compose.at({h, gf}) != compose.at({hg, f}))
          throw ConfigError("composition is not associative");
      }
    }
}

NerveTruncation NerveTruncation::build(const FiniteCategory& cat) {
  NerveTruncation nerve;
  nerve.cat = &cat;
  const int nm = static_cast<int>(cat.morphisms.size());
  for (int g = 0; g < nm; ++g)
    for (int f = 0; f < nm; ++f)
      if (cat.morphisms[f].cod == cat.morphisms[g].dom) nerve.pairs.emplace_back(g, f);
  // simplicial identities on the truncation
  for (std::size_t s = 0; s < nerve.pairs.size(); ++s) {
    // d_i d_j = d_{j-1} d_i for i < j
    const int d0 = nerve.face2(static_cast<int>(s), 0);
    const int d1 = nerve.face2(static_cast<int>(s), 1);
    const int d2 = nerve.face2(static_cast<int>(s), 2);
    if (nerve.face1(d1, 0) != nerve.face1(d0, 0)) throw ConfigError("simplicial identity d0d1");
    if (nerve.face1(d2, 0) != nerve.face1(d0, 1)) throw ConfigError("simplicial identity d0d2");
    if (nerve.face1(d2, 1) != nerve.face1(d1, 1)) throw ConfigError("simplicial identity d1d2");
  }
  return nerve;
}

int NerveTruncation::face1(int morphism, int j) const {
  const auto& m = cat->morphisms[morphism];
  return j == 0 ? m.cod : m.dom;
}

int NerveTruncation::face2(int pair, int j) const {
  const auto& [g, f] = pairs[pair];
  if (j == 0) return g;
  if (j == 2) return f;
  return cat->compose.at({g, f});
}

std::size_t NerveTruncation::size(int level) const {
  switch (level) {
    case 0:
      return cat->objects.size();
    case 1:
      return cat->morphisms.size();
    case 2:
      return pairs.size();
    default:
      throw LevelOverflow("nerve truncated at level 2");
  }
}

Cochain coboundary(const NerveTruncation& nerve, const Cochain& c) {
  if (c.level > 1) throw LevelOverflow("coboundary defined up to level 1 in the truncation");
  Cochain out;
  out.level = c.level + 1;
  out.bits.assign(nerve.size(out.level), 0);
  if (c.level == 0) {
    for (std::size_t f = 0; f < nerve.size(1); ++f)
      out.bits[f] = static_cast<std::uint8_t>(c.bits[nerve.face1(static_cast<int>(f), 0)] ^
                                              c.bits[nerve.face1(static_cast<int>(f), 1)]);
  } else {
    for (std::size_t s = 0; s < nerve.size(2); ++s) {
      std::uint8_t b = 0;
      for (int j = 0; j < 3; ++j) b ^= c.bits[nerve.face2(static_cast<int>(s), j)];
      out.bits[s] = b;
    }
  }
  return out;
}

Gf2Matrix::Gf2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

void Gf2Matrix::flip(std::size_t r, std::size_t c) {
  data_[r * words_ + c / 64] ^= (std::uint64_t{1} << (c % 64));
}

bool Gf2Matrix::get(std::size_t r, std::size_t c) const {
  return (data_[r * words_ + c / 64] >> (c % 64)) & 1;
}

int Gf2Matrix::rank() const {
  std::vector<std::uint64_t> m = data_;
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols_ && row < rows_; ++c) {
    const std::size_t w = c / 64;
    const std::uint64_t bit = std::uint64_t{1} << (c % 64);
    std::size_t pivot = row;
    while (pivot < rows_ && !(m[pivot * words_ + w] & bit)) ++pivot;
    if (pivot == rows_) continue;
    if (pivot != row)
      for (std::size_t k = 0; k < words_; ++k) std::swap(m[row * words_ + k], m[pivot * words_ + k]);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == row) continue;
      if (m[r * words_ + w] & bit)
        for (std::size_t k = 0; k < words_; ++k) m[r * words_ + k] ^= m[row * words_ + k];
    }
    ++row;
    ++rank;
  }
  return rank;
}

std::optional<std::vector<std::uint8_t>> Gf2Matrix::solve(
    const std::vector<std::uint8_t>& v) const {
  // augmented elimination
  const std::size_t aw = words_ + 1;
  std::vector<std::uint64_t> m(rows_ * aw, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < words_; ++k) m[r * aw + k] = data_[r * words_ + k];
    m[r * aw + words_] = v[r] & 1;
  }
  std::vector<int> pivot_col(rows_, -1);
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols_ && row < rows_; ++c) {
    const std::size_t w = c / 64;
    const std::uint64_t bit = std::uint64_t{1} << (c % 64);
    std::size_t pivot = row;
    while (pivot < rows_ && !(m[pivot * aw + w] & bit)) ++pivot;
    if (pivot == rows_) continue;
    if (pivot != row)
      for (std::size_t k = 0; k < aw; ++k) std::swap(m[row * aw + k], m[pivot * aw + k]);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == row) continue;
      if (m[r * aw + w] & bit)
        for (std::size_t k = 0; k < aw; ++k) m[r * aw + k] ^= m[row * aw + k];
    }
    pivot_col[row] = static_cast<int>(c);
    ++row;
  }
  for (std::size_t r = row; r < rows_; ++r)
    if (m[r * aw + words_] & 1) return std::nullopt;  // inconsistent
  std::vector<std::uint8_t> t(cols_, 0);
  for (std::size_t r = 0; r < row; ++r)
    if (m[r * aw + words_] & 1) t[pivot_col[r]] = 1;
  return t;
}

Gf2Matrix d0_matrix(const NerveTruncation& nerve) {
  Gf2Matrix m(nerve.size(1), nerve.size(0));
  for (std::size_t f = 0; f < nerve.size(1); ++f) {
    m.flip(f, nerve.face1(static_cast<int>(f), 0));
    m.flip(f, nerve.face1(static_cast<int>(f), 1));
  }
  return m;
}

Gf2Matrix d1_matrix(const NerveTruncation& nerve) {
  Gf2Matrix m(nerve.size(2), nerve.size(1));
  for (std::size_t s = 0; s < nerve.size(2); ++s)
    for (int j = 0; j < 3; ++j) m.flip(s, nerve.face2(static_cast<int>(s), j));
  return m;
}

H1Report h1_z2(const FiniteCategory& cat) {
  const NerveTruncation nerve = NerveTruncation::build(cat);
  const int rank_d0 = d0_matrix(nerve).rank();
  const int rank_d1 = d1_matrix(nerve).rank();
  H1Report rep;
  rep.dim_exact = static_cast<std::size_t>(rank_d0);
  rep.dim_closed = nerve.size(1) - static_cast<std::size_t>(rank_d1);
  rep.h1_size = std::size_t{1} << (rep.dim_closed - rep.dim_exact);
  return rep;
}

H1Report h1_z2_bruteforce(const FiniteCategory& cat) {
  const NerveTruncation nerve = NerveTruncation::build(cat);
  const std::size_t n1 = nerve.size(1);
  const std::size_t n0 = nerve.size(0);
  if (n1 > 16) throw SpinorlabError("brute force limited to 16 one-simplices");
  std::size_t n_closed = 0;
  std::vector<bool> exact(std::size_t{1} << n1, false);
  for (std::size_t t = 0; t < (std::size_t{1} << n0); ++t) {
    Cochain c0{0, {}};
    c0.bits.resize(n0);
    for (std::size_t o = 0; o < n0; ++o) c0.bits[o] = (t >> o) & 1;
    const Cochain dv = coboundary(nerve, c0);
    std::size_t key = 0;
    for (std::size_t f = 0; f < n1; ++f) key |= std::size_t{dv.bits[f]} << f;
    exact[key] = true;
  }
  std::size_t n_exact = 0;
  for (std::size_t v = 0; v < (std::size_t{1} << n1); ++v) {
    Cochain c1{1, {}};
    c1.bits.resize(n1);
    for (std::size_t f = 0; f < n1; ++f) c1.bits[f] = (v >> f) & 1;
    const Cochain dv = coboundary(nerve, c1);
    bool closed = true;
    for (auto b : dv.bits)
      if (b) {
        closed = false;
        break;
      }
    if (closed) ++n_closed;
    if (exact[v]) ++n_exact;
  }
  H1Report rep;
  rep.h1_size = n_closed / n_exact;
  std::size_t dc = 0, de = 0;
  while ((std::size_t{1} << dc) < n_closed) ++dc;
  while ((std::size_t{1} << de) < n_exact) ++de;
  rep.dim_closed = dc;
  rep.dim_exact = de;
  return rep;
}

TwistReport dirac_structure_twist_demo(const FiniteCategory& cat, const Cochain& v) {
  if (v.level != 1) throw LevelOverflow("twist demo expects a 1-cochain");
  const NerveTruncation nerve = NerveTruncation::build(cat);
  TwistReport rep;
  rep.closed = true;
  for (std::size_t s = 0; s < nerve.size(2); ++s) {
    std::uint8_t b = 0;
    for (int j = 0; j < 3; ++j) b ^= v.bits[nerve.face2(static_cast<int>(s), j)];
    if (b) {
      rep.closed = false;
      const auto& [g, f] = nerve.pairs[s];
      rep.violation = std::make_pair(cat.morphisms[g].id, cat.morphisms[f].id);
      break;
    }
  }
  if (!rep.closed) return rep;
  const auto witness = d0_matrix(nerve).solve(v.bits);
  rep.exact = witness.has_value();
  rep.witness = witness;
  return rep;
}

FiniteCategory one_object_category() {
  return FiniteCategory::build({"*"}, {{"id", "*", "*"}}, {{{"id", "id", "id"}}});
}

FiniteCategory arrow_category() {
  return FiniteCategory::build({"A", "B"}, {{"idA", "A", "A"}, {"idB", "B", "B"}, {"f", "A", "B"}},
                               {{{"idA", "idA", "idA"}},
                                {{"idB", "idB", "idB"}},
                                {{"f", "idA", "f"}},
                                {{"idB", "f", "f"}}});
}

FiniteCategory group_category(const std::vector<std::string>& elems,
                              const std::vector<std::vector<int>>& cayley, int unit) {
  std::vector<std::tuple<std::string, std::string, std::string>> arrows;
  for (const auto& e : elems) arrows.emplace_back(e, "*", "*");
  std::vector<std::array<std::string, 3>> table;
  for (std::size_t g = 0; g < elems.size(); ++g)
    for (std::size_t f = 0; f < elems.size(); ++f)
      table.push_back({elems[g], elems[f], elems[cayley[g][f]]});
  (void)unit;
  return FiniteCategory::build({"*"}, arrows, table);
}

FiniteCategory z2_category() {
  return group_category({"e", "s"}, {{0, 1}, {1, 0}}, 0);
}

FiniteCategory z3_category() {
  return group_category({"e", "a", "b"}, {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}, 0);
}

FiniteCategory z4_category() {
  return group_category({"e", "a", "b", "c"},
                        {{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}}, 0);
}

FiniteCategory z2xz2_category() {
  return group_category({"e", "a", "b", "c"},
                        {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}}, 0);
}

FiniteCategory category_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("category JSON parse error: ") + e.what());
  }
  std::vector<std::string> objects = j.at("objects").get<std::vector<std::string>>();
  std::vector<std::tuple<std::string, std::string, std::string>> arrows;
  for (const auto& m : j.at("morphisms"))
    arrows.emplace_back(m.at("id").get<std::string>(), m.at("dom").get<std::string>(),
                        m.at("cod").get<std::string>());
  std::vector<std::array<std::string, 3>> table;
  for (const auto& row : j.at("compose"))
    table.push_back({row.at(0).get<std::string>(), row.at(1).get<std::string>(),
                     row.at(2).get<std::string>()});
  return FiniteCategory::build(std::move(objects), std::move(arrows), std::move(table));
}

}  // namespace spinorlab::cohomology
