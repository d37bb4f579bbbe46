#include "habs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "habs/errors.hpp"

namespace habs {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

LinearSystem LinearSystem::dense(std::vector<std::vector<double>> A,
                                 std::vector<std::vector<double>> B) {
  LinearSystem sys;
  sys.n_ = static_cast<std::uint32_t>(A.size());
  if (sys.n_ == 0) throw std::invalid_argument("A must be non-empty");
  for (const auto& row : A)
    if (row.size() != sys.n_) throw std::invalid_argument("A must be square");
  if (B.size() != sys.n_) throw std::invalid_argument("B must have n rows");
  sys.m_ = static_cast<std::uint32_t>(B[0].size());
  if (sys.m_ == 0) throw std::invalid_argument("B must have at least one column");
  for (const auto& row : B)
    if (row.size() != sys.m_) throw std::invalid_argument("ragged B");

  sys.b_nonzero_.assign(sys.n_, 0);
  for (std::uint32_t i = 0; i < sys.n_; ++i)
    for (std::uint32_t j = 0; j < sys.m_; ++j) {
      check_finite(B[i][j], "B entry");
      if (B[i][j] != 0.0) sys.b_nonzero_[i] = 1;
    }

  // Dense storage only pays off for small systems; convert larger inputs.
  if (sys.n_ < 64) {
    sys.dense_ = true;
    sys.a_dense_.resize(static_cast<std::size_t>(sys.n_) * sys.n_);
    for (std::uint32_t i = 0; i < sys.n_; ++i)
      for (std::uint32_t j = 0; j < sys.n_; ++j) {
        check_finite(A[i][j], "A entry");
        sys.a_dense_[static_cast<std::size_t>(i) * sys.n_ + j] = A[i][j];
      }
    return sys;
  }
  std::vector<SparseEntry> entries;
  for (std::uint32_t i = 0; i < sys.n_; ++i)
    for (std::uint32_t j = 0; j < sys.n_; ++j)
      if (A[i][j] != 0.0) entries.push_back({i, j, A[i][j]});
  std::vector<SparseEntry> b_entries;  // b_nonzero_ already set
  LinearSystem out = sparse(sys.n_, sys.m_, std::move(entries), b_entries);
  out.b_nonzero_ = sys.b_nonzero_;
  return out;
}

LinearSystem LinearSystem::sparse(std::uint32_t n, std::uint32_t m,
                                  std::vector<SparseEntry> a_entries,
                                  std::vector<SparseEntry> b_entries) {
  if (n == 0 || m == 0) throw std::invalid_argument("dimensions must be positive");
  LinearSystem sys;
  sys.n_ = n;
  sys.m_ = m;
  sys.dense_ = false;

  std::sort(a_entries.begin(), a_entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  sys.a_offsets_.assign(n + 1, 0);
  for (std::size_t t = 0; t < a_entries.size(); ++t) {
    const auto& e = a_entries[t];
    if (e.i >= n || e.j >= n) throw std::invalid_argument("A entry index out of range");
    check_finite(e.v, "A entry");
    if (t > 0 && a_entries[t - 1].i == e.i && a_entries[t - 1].j == e.j)
      throw std::invalid_argument("duplicate A entry");
    if (e.v == 0.0) continue;
    ++sys.a_offsets_[e.i + 1];
    sys.a_cols_.push_back(e.j);
    sys.a_vals_.push_back(e.v);
  }
  for (std::uint32_t i = 1; i <= n; ++i) sys.a_offsets_[i] += sys.a_offsets_[i - 1];

  sys.b_nonzero_.assign(n, 0);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& e : b_entries) {
    if (e.i >= n || e.j >= m) throw std::invalid_argument("B entry index out of range");
    check_finite(e.v, "B entry");
    if (!seen.insert({e.i, e.j}).second) throw std::invalid_argument("duplicate B entry");
    if (e.v != 0.0) sys.b_nonzero_[e.i] = 1;
  }
  return sys;
}

namespace {

void check_lattice_shape(const LatticePartition& part) {
  const auto n = part.lower.size();
  if (n == 0) throw std::invalid_argument("lattice needs at least one axis");
  if (part.upper.size() != n || part.epsilon.size() != n)
    throw std::invalid_argument("lattice vectors must share one dimension");
}

// Validates one axis and returns its cell count.
std::uint32_t checked_axis_count(const LatticePartition& part, std::size_t i) {
  check_finite(part.lower[i], "lattice bound");
  check_finite(part.upper[i], "lattice bound");
  if (!(part.epsilon[i] > 0) || !std::isfinite(part.epsilon[i]))
    throw std::invalid_argument("epsilon must be positive");
  if (!(part.lower[i] < part.upper[i]))
    throw std::invalid_argument("lower must be strictly below upper");
  double ratio = (part.upper[i] - part.lower[i]) / part.epsilon[i];
  double rounded = std::round(ratio);
  if (rounded < 1 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
    throw std::invalid_argument("box is not exactly tiled by epsilon on axis " + std::to_string(i));
  if (rounded > 4294967295.0) throw std::invalid_argument("cell count overflow");
  return static_cast<std::uint32_t>(rounded);
}

}  // namespace

void validate_lattice(const LatticePartition& part) {
  check_lattice_shape(part);
  for (std::size_t i = 0; i < part.lower.size(); ++i) checked_axis_count(part, i);
}

std::vector<std::uint32_t> lattice_counts(const LatticePartition& part) {
  check_lattice_shape(part);
  std::vector<std::uint32_t> counts(part.dim());
  for (std::uint32_t i = 0; i < part.dim(); ++i) counts[i] = checked_axis_count(part, i);
  return counts;
}

std::string lattice_cell_name(const Cell& cell) {
  std::string name = "c";
  for (std::size_t i = 0; i < cell.index.size(); ++i) {
    if (i) name += '_';
    name += std::to_string(cell.index[i]);
  }
  return name;
}

std::vector<double> lattice_cell_center(const LatticePartition& part, const Cell& cell) {
  std::vector<double> c(part.dim());
  for (std::uint32_t i = 0; i < part.dim(); ++i)
    c[i] = part.lower[i] + (cell.index[i] + 0.5) * part.epsilon[i];
  return c;
}

namespace {

// Validates the lattice and the face in one pass without materializing the
// per-axis counts, so the O(nnz) fast test stays free of per-call allocation.
void validate_face(const Face& face, const LatticePartition& part) {
  check_lattice_shape(part);
  const auto n = part.dim();
  if (face.cell_lo.index.size() != n) throw std::invalid_argument("face cell dimension mismatch");
  if (face.axis >= n) throw std::invalid_argument("face axis out of range");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto count = checked_axis_count(part, i);
    if (face.cell_lo.index[i] >= count)
      throw std::invalid_argument("face cell outside the lattice");
    if (i == face.axis && face.cell_lo.index[i] + 1 >= count)
      throw std::invalid_argument("face has no upper cell inside the lattice");
  }
}

// Coordinates of the component-wise lowest shared vertex: the face plane
// coordinate on the face axis, the cell's lower corner elsewhere.
std::vector<double> lowest_vertex(const Face& face, const LatticePartition& part) {
  const auto n = part.dim();
  std::vector<double> v(n);
  for (std::uint32_t j = 0; j < n; ++j)
    v[j] = part.lower[j] + face.cell_lo.index[j] * part.epsilon[j];
  v[face.axis] += part.epsilon[face.axis];
  return v;
}

}  // namespace

std::vector<std::vector<double>> shared_face_vertices(const Face& face,
                                                      const LatticePartition& part) {
  validate_face(face, part);
  const auto n = part.dim();
  if (n > 30) throw std::invalid_argument("vertex enumeration limited to n <= 30");

  std::vector<std::uint32_t> free_axes;
  for (std::uint32_t j = 0; j < n; ++j)
    if (j != face.axis) free_axes.push_back(j);
  auto v0 = lowest_vertex(face, part);

  std::vector<std::vector<double>> out;
  const std::size_t total = std::size_t{1} << free_axes.size();
  out.reserve(total);
  for (std::size_t pattern = 0; pattern < total; ++pattern) {
    auto v = v0;
    for (std::size_t t = 0; t < free_axes.size(); ++t)
      if (pattern >> (free_axes.size() - 1 - t) & 1) v[free_axes[t]] += part.epsilon[free_axes[t]];
    out.push_back(std::move(v));
  }
  return out;
}

bool transition_feasible_full(const LinearSystem& sys, const Face& face,
                              const LatticePartition& part, Direction dir) {
  if (sys.n() != part.dim()) throw std::invalid_argument("system/lattice dimension mismatch");
  if (sys.b_row_nonzero(face.axis)) return true;
  auto vertices = shared_face_vertices(face, part);
  std::vector<std::pair<std::uint32_t, double>> row;
  sys.for_each_a_entry(face.axis, [&](std::uint32_t j, double v) { row.emplace_back(j, v); });
  for (const auto& v : vertices) {
    double p = 0.0;
    for (const auto& [j, a] : row) p += a * v[j];
    if (dir == Direction::low_to_high ? p > 0.0 : p < 0.0) return true;
  }
  return false;
}

bool transition_feasible_fast(const LinearSystem& sys, const Face& face,
                              const LatticePartition& part, Direction dir) {
  if (sys.n() != part.dim()) throw std::invalid_argument("system/lattice dimension mismatch");
  validate_face(face, part);
  if (sys.b_row_nonzero(face.axis)) return true;

  // Over the shared face only the non-face coordinates vary, each over
  // [v0_j, v0_j + eps_j]; the extremum of a_k.v is reached by adding every
  // positive (negative) off-diagonal contribution at full cell width.
  const auto k = face.axis;
  double p = 0.0, pos = 0.0, neg = 0.0;
  sys.for_each_a_entry(k, [&](std::uint32_t j, double a) {
    double base = part.lower[j] + face.cell_lo.index[j] * part.epsilon[j];
    if (j == k) base += part.epsilon[j];
    p += a * base;
    if (j != k) {
      if (a > 0.0)
        pos += a * part.epsilon[j];
      else
        neg += a * part.epsilon[j];
    }
  });
  return dir == Direction::low_to_high ? p + pos > 0.0 : p + neg < 0.0;
}

std::vector<std::vector<double>> lattice_cell_centers(const LatticePartition& part) {
  auto counts = lattice_counts(part);
  const auto n = part.dim();
  std::uint64_t total = 1;
  for (auto c : counts) total *= c;
  std::vector<std::vector<double>> centers;
  centers.reserve(total);
  Cell cell;
  cell.index.assign(n, 0);
  for (std::uint64_t id = 0; id < total; ++id) {
    centers.push_back(lattice_cell_center(part, cell));
    for (std::uint32_t axis = n; axis-- > 0;) {
      if (++cell.index[axis] < counts[axis]) break;
      cell.index[axis] = 0;
    }
  }
  return centers;
}

TransitionSystem build_lattice_abstraction(const LinearSystem& sys, const LatticePartition& part,
                                           const LatticeOptions& opts) {
  if (sys.n() != part.dim()) throw std::invalid_argument("system/lattice dimension mismatch");
  auto counts = lattice_counts(part);
  const auto n = part.dim();

  std::uint64_t total = 1;
  for (auto c : counts) {
    if (total > opts.cell_budget / c) {
      total = opts.cell_budget + 1;
      break;
    }
    total *= c;
  }
  if (total > opts.cell_budget)
    throw BudgetError("lattice cell count exceeds budget of " + std::to_string(opts.cell_budget));

  // States in lexicographic index order (last axis fastest).
  std::vector<std::string> names;
  names.reserve(total);
  std::vector<Edge> edges;
  auto test = opts.use_full_test ? transition_feasible_full : transition_feasible_fast;

  std::vector<std::uint64_t> stride(n);
  std::uint64_t acc = 1;
  for (std::uint32_t axis = n; axis-- > 0;) {
    stride[axis] = acc;
    acc *= counts[axis];
  }

  Cell cell;
  cell.index.assign(n, 0);
  for (std::uint64_t id = 0; id < total; ++id) {
    names.push_back(lattice_cell_name(cell));
    if (opts.self_loops)
      edges.push_back({static_cast<StateId>(id), static_cast<StateId>(id)});
    for (std::uint32_t axis = 0; axis < n; ++axis) {
      if (cell.index[axis] + 1 >= counts[axis]) continue;
      Face face{cell, axis};
      const auto hi = static_cast<StateId>(id + stride[axis]);
      if (test(sys, face, part, Direction::low_to_high))
        edges.push_back({static_cast<StateId>(id), hi});
      if (test(sys, face, part, Direction::high_to_low))
        edges.push_back({hi, static_cast<StateId>(id)});
    }
    for (std::uint32_t axis = n; axis-- > 0;) {
      if (++cell.index[axis] < counts[axis]) break;
      cell.index[axis] = 0;
    }
  }
  std::vector<std::string> outputs = names;
  return TransitionSystem(std::move(names), std::move(outputs), std::move(edges));
}

}  // namespace habs
