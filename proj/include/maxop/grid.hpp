#pragma once

// Discretized domains and grid functions. A Domain is an axis-aligned box in
// R^n (n <= 3) split into power-of-two many cells per axis with one uniform
// mesh width h. Functions are nonnegative extended reals stored row-major
// with the last axis fastest; weights are additionally finite everywhere.
//
// File format GRIDFN v1 (text):
//   gridfn 1
//   dim <n>
//   shape <N1> ... <Nn>
//   h <decimal>
//   origin <x1> ... <xn>
//   <one decimal value per line, row-major, last axis fastest>
// Values must be nonnegative and finite; the token `inf` is rejected. For
// dim 1 a CSV file (header `value`, one value per line, h = 1) also loads.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "extreal.hpp"

namespace maxop {

using Index3 = std::array<std::int64_t, 3>;

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

struct Domain {
  int dim = 1;
  Index3 shape{1, 1, 1};  // axes >= dim stay 1
  double h = 1.0;
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  Domain() = default;
  Domain(int d, Index3 s, double mesh = 1.0, std::array<double, 3> o = {0, 0, 0})
      : dim(d), shape(s), h(mesh), origin(o) {
    validate();
  }

  static Domain line(std::int64_t n, double mesh = 1.0, double x0 = 0.0) {
    return Domain(1, {n, 1, 1}, mesh, {x0, 0, 0});
  }
  static Domain square(std::int64_t n1, std::int64_t n2, double mesh = 1.0) {
    return Domain(2, {n1, n2, 1}, mesh);
  }
  static Domain cube3(std::int64_t n1, std::int64_t n2, std::int64_t n3, double mesh = 1.0) {
    return Domain(3, {n1, n2, n3}, mesh);
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("domain dim must be 1, 2, or 3");
    if (!(h > 0.0) || std::isinf(h)) throw std::invalid_argument("mesh width must be positive and finite");
    for (int a = 0; a < dim; ++a)
      if (!is_power_of_two(shape[a]))
        throw std::invalid_argument("shape entries must be powers of two");
    for (int a = dim; a < 3; ++a)
      if (shape[a] != 1) throw std::invalid_argument("unused axes must have extent 1");
  }

  std::int64_t cell_count() const { return shape[0] * shape[1] * shape[2]; }
  double cell_measure() const { return std::pow(h, dim); }

  std::int64_t flat_index(const Index3& c) const {
    return (c[0] * shape[1] + c[1]) * shape[2] + c[2];
  }
  Index3 unflatten(std::int64_t i) const {
    Index3 c{0, 0, 0};
    c[2] = i % shape[2];
    i /= shape[2];
    c[1] = i % shape[1];
    c[0] = i / shape[1];
    return c;
  }
  // Center coordinate of cell c along axis a.
  double center(const Index3& c, int a) const {
    return origin[a] + (static_cast<double>(c[a]) + 0.5) * h;
  }

  friend bool operator==(const Domain& a, const Domain& b) {
    return a.dim == b.dim && a.shape == b.shape && a.h == b.h && a.origin == b.origin;
  }
};

inline void require_same_domain(const Domain& a, const Domain& b) {
  if (!(a == b)) throw std::invalid_argument("domain mismatch");
}

// Axis-aligned lattice box: cells [lower, lower + size) per axis. The basis
// enumeration (dyadic cubes, cubes, rectangles) produces these.
struct Box {
  Index3 lower{0, 0, 0};
  Index3 size{1, 1, 1};  // axes >= dim stay 1

  std::int64_t cell_count() const { return size[0] * size[1] * size[2]; }
  bool contains(const Index3& c) const {
    for (int a = 0; a < 3; ++a)
      if (c[a] < lower[a] || c[a] >= lower[a] + size[a]) return false;
    return true;
  }
  bool inside(const Domain& d) const {
    for (int a = 0; a < 3; ++a)
      if (lower[a] < 0 || size[a] < 1 || lower[a] + size[a] > d.shape[a]) return false;
    return true;
  }
  friend bool operator==(const Box& a, const Box& b) {
    return a.lower == b.lower && a.size == b.size;
  }
  // Canonical order: size first, then position, both lexicographic. Ties in
  // suprema are broken toward the smallest box in this order.
  friend bool operator<(const Box& a, const Box& b) {
    if (a.size != b.size) return a.size < b.size;
    return a.lower < b.lower;
  }
};

template <class Fn>
void for_each_cell(const Box& box, Fn&& fn) {
  Index3 c;
  for (c[0] = box.lower[0]; c[0] < box.lower[0] + box.size[0]; ++c[0])
    for (c[1] = box.lower[1]; c[1] < box.lower[1] + box.size[1]; ++c[1])
      for (c[2] = box.lower[2]; c[2] < box.lower[2] + box.size[2]; ++c[2]) fn(c);
}

struct GridFunction {
  Domain domain;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Domain d, double fill = 0.0)
      : domain(d), values(static_cast<std::size_t>(d.cell_count()), fill) {}
  GridFunction(Domain d, std::vector<double> v) : domain(d), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(domain.cell_count()))
      throw std::invalid_argument("value count does not match domain");
    for (double x : values)
      if (std::isnan(x) || x < 0.0) throw std::invalid_argument("grid values must be nonnegative");
  }

  double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
  double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
  double at(const Index3& c) const { return values[static_cast<std::size_t>(domain.flat_index(c))]; }

  bool finite() const {
    for (double x : values)
      if (std::isinf(x)) return false;
    return true;
  }
  double max_value() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, x);
    return m;
  }
};

inline void require_weight(const GridFunction& w, const char* what = "weight") {
  if (!w.finite()) throw std::invalid_argument(std::string(what) + " must be finite everywhere");
}

// Subset of cells as a dense 0/1 mask.
struct CellSet {
  Domain domain;
  std::vector<std::uint8_t> mask;

  CellSet() = default;
  explicit CellSet(Domain d) : domain(d), mask(static_cast<std::size_t>(d.cell_count()), 0) {}

  bool contains(std::int64_t i) const { return mask[static_cast<std::size_t>(i)] != 0; }
  void insert(std::int64_t i) { mask[static_cast<std::size_t>(i)] = 1; }
  void insert(const Box& b) {
    for_each_cell(b, [&](const Index3& c) { insert(domain.flat_index(c)); });
  }
  std::int64_t count() const {
    std::int64_t n = 0;
    for (auto m : mask) n += m;
    return n;
  }
  double measure() const { return static_cast<double>(count()) * domain.cell_measure(); }
};

// ---- integrals and averages -------------------------------------------------

// Lebesgue integral over a box; +inf values absorb.
inline double integral(const GridFunction& f, const Box& box) {
  if (!box.inside(f.domain)) throw std::invalid_argument("box not inside domain");
  long double sum = 0.0L;
  bool inf = false;
  for_each_cell(box, [&](const Index3& c) {
    double v = f.at(c);
    if (std::isinf(v)) inf = true;
    else sum += v;
  });
  if (inf) return kInf;
  return static_cast<double>(sum) * f.domain.cell_measure();
}

inline double integral(const GridFunction& f, const CellSet& cells) {
  require_same_domain(f.domain, cells.domain);
  long double sum = 0.0L;
  bool inf = false;
  for (std::int64_t i = 0; i < f.domain.cell_count(); ++i) {
    if (!cells.contains(i)) continue;
    double v = f[i];
    if (std::isinf(v)) inf = true;
    else sum += v;
  }
  if (inf) return kInf;
  return static_cast<double>(sum) * f.domain.cell_measure();
}

inline double integral(const GridFunction& f) {
  Box all;
  all.size = f.domain.shape;
  return integral(f, all);
}

inline double average(const GridFunction& f, const Box& box) {
  if (box.cell_count() <= 0) throw std::invalid_argument("empty box");
  double s = integral(f, box);
  if (std::isinf(s)) return kInf;
  return s / (static_cast<double>(box.cell_count()) * f.domain.cell_measure());
}

// Weighted measure integral(w restricted to set); w finite.
inline double weight_measure(const GridFunction& w, const CellSet& cells) { return integral(w, cells); }

// ---- GRIDFN v1 I/O ----------------------------------------------------------

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline double parse_value(const std::string& token, const char* where) {
  // Strict: plain decimal/exponent notation, finite, nonnegative. from_chars
  // is locale-independent, rejects hex floats, and keeps subnormals in range.
  if (token.empty()) throw FormatError(std::string("empty value in ") + where);
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{})
    throw FormatError(std::string("malformed number '") + token + "' in " + where);
  if (res.ptr != last) throw FormatError(std::string("trailing junk in number '") + token + "'");
  if (std::isnan(v) || std::isinf(v)) throw FormatError(std::string("non-finite value '") + token + "' rejected");
  if (v < 0.0) throw FormatError(std::string("negative value '") + token + "' rejected");
  return v;
}
}  // namespace detail

inline GridFunction load_gridfn(std::istream& in, const char* name = "<stream>") {
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw FormatError(std::string("unexpected end of file before ") + what);
    return line;
  };
  {
    std::istringstream hdr(next_line("header"));
    std::string magic;
    int version = 0;
    hdr >> magic >> version;
    if (magic != "gridfn" || version != 1 || !hdr)
      throw FormatError(std::string(name) + ": expected 'gridfn 1' header");
  }
  Domain d;
  {
    std::istringstream l(next_line("dim"));
    std::string key;
    l >> key >> d.dim;
    if (key != "dim" || !l) throw FormatError("expected 'dim <n>'");
  }
  if (d.dim < 1 || d.dim > 3) throw FormatError("dim must be 1, 2, or 3");
  {
    std::istringstream l(next_line("shape"));
    std::string key;
    l >> key;
    if (key != "shape") throw FormatError("expected 'shape ...'");
    for (int a = 0; a < d.dim; ++a) {
      if (!(l >> d.shape[a])) throw FormatError("shape entry count does not match dim");
    }
    std::string extra;
    if (l >> extra) throw FormatError("too many shape entries");
  }
  {
    std::istringstream l(next_line("h"));
    std::string key, tok;
    l >> key >> tok;
    if (key != "h" || tok.empty()) throw FormatError("expected 'h <value>'");
    d.h = detail::parse_value(tok, "h");
    if (d.h <= 0.0) throw FormatError("h must be positive");
  }
  {
    std::istringstream l(next_line("origin"));
    std::string key;
    l >> key;
    if (key != "origin") throw FormatError("expected 'origin ...'");
    for (int a = 0; a < d.dim; ++a) {
      if (!(l >> d.origin[a])) throw FormatError("origin entry count does not match dim");
      if (std::isnan(d.origin[a]) || std::isinf(d.origin[a])) throw FormatError("origin must be finite");
    }
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(name) + ": " + e.what());
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(d.cell_count()));
  while (std::getline(in, line)) {
    // Trim trailing carriage return / whitespace-only lines at the end.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    values.push_back(detail::parse_value(line, "values"));
  }
  if (values.size() != static_cast<std::size_t>(d.cell_count()))
    throw FormatError("value count does not match shape");
  return GridFunction(d, std::move(values));
}

inline GridFunction load_csv(std::istream& in, const char* name = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string(name) + ": empty CSV");
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  if (line != "value") throw FormatError("CSV must start with header 'value'");
  std::vector<double> values;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    values.push_back(detail::parse_value(line, "csv values"));
  }
  if (!is_power_of_two(static_cast<std::int64_t>(values.size())))
    throw FormatError("CSV row count must be a power of two");
  Domain d = Domain::line(static_cast<std::int64_t>(values.size()));
  return GridFunction(d, std::move(values));
}

inline GridFunction load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  auto ends_with = [&](const char* suffix) {
    std::string s(suffix);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".csv")) return load_csv(in, path.c_str());
  return load_gridfn(in, path.c_str());
}

inline void save_grid(const GridFunction& f, std::ostream& out) {
  if (!f.finite())
    throw FormatError("grid contains non-finite values; GRIDFN v1 cannot represent them");
  out << "gridfn 1\n";
  out << "dim " << f.domain.dim << "\n";
  out << "shape";
  for (int a = 0; a < f.domain.dim; ++a) out << ' ' << f.domain.shape[a];
  out << "\n";
  out << "h " << format17(f.domain.h) << "\n";
  out << "origin";
  for (int a = 0; a < f.domain.dim; ++a) out << ' ' << format17(f.domain.origin[a]);
  out << "\n";
  for (double v : f.values) out << format17(v) << "\n";
}

inline void save_grid(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_grid(f, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace maxop
