#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "habs/ts.hpp"

namespace habs {

struct SparseEntry {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double v = 0.0;
};

/// dx/dt = Ax + Bu. Row-k slices of A are the hot path of the face tests, so
/// A is stored either dense row-major (small n) or CSR; B only needs a
/// row-has-nonzero flag plus the dense payload for small systems.
class LinearSystem {
 public:
  static LinearSystem dense(std::vector<std::vector<double>> A,
                            std::vector<std::vector<double>> B);
  static LinearSystem sparse(std::uint32_t n, std::uint32_t m,
                             std::vector<SparseEntry> a_entries,
                             std::vector<SparseEntry> b_entries);

  std::uint32_t n() const { return n_; }
  std::uint32_t m() const { return m_; }

  bool b_row_nonzero(std::uint32_t k) const { return b_nonzero_[k] != 0; }

  /// Calls fn(j, a_kj) for every stored nonzero of row k.
  template <class F>
  void for_each_a_entry(std::uint32_t k, F&& fn) const {
    if (dense_) {
      const double* row = a_dense_.data() + static_cast<std::size_t>(k) * n_;
      for (std::uint32_t j = 0; j < n_; ++j)
        if (row[j] != 0.0) fn(j, row[j]);
    } else {
      for (std::size_t t = a_offsets_[k]; t < a_offsets_[k + 1]; ++t) fn(a_cols_[t], a_vals_[t]);
    }
  }

 private:
  LinearSystem() = default;
  std::uint32_t n_ = 0, m_ = 0;
  bool dense_ = false;
  std::vector<double> a_dense_;        // n*n row-major when dense
  std::vector<std::size_t> a_offsets_; // CSR otherwise
  std::vector<std::uint32_t> a_cols_;
  std::vector<double> a_vals_;
  std::vector<char> b_nonzero_;        // per row of B
};

/// Hypercubic grid over [lower, upper) tiled exactly by epsilon per axis.
struct LatticePartition {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> epsilon;
  std::uint32_t dim() const { return static_cast<std::uint32_t>(lower.size()); }
};

/// Throws std::invalid_argument unless lower < upper, epsilon > 0, and each
/// axis is tiled by an integral cell count (within 1e-9 relative).
void validate_lattice(const LatticePartition& part);
std::vector<std::uint32_t> lattice_counts(const LatticePartition& part);

struct Cell {
  std::vector<std::uint32_t> index;
};

/// The common face between cell_lo and the cell one step up along `axis`.
struct Face {
  Cell cell_lo;
  std::uint32_t axis = 0;
};

enum class Direction { low_to_high, high_to_low };

std::string lattice_cell_name(const Cell& cell);
std::vector<double> lattice_cell_center(const LatticePartition& part, const Cell& cell);

/// The 2^(n-1) corner points shared by the two cells of `face`, in
/// lexicographic order of their 0/1 offset pattern over the non-face axes
/// (earlier axes most significant). The first vertex is the component-wise
/// lowest one. Rejects n > 30.
std::vector<std::vector<double>> shared_face_vertices(const Face& face,
                                                      const LatticePartition& part);

/// Exhaustive vertex test: a crossing is feasible iff row k of B has a
/// nonzero, or the flow component along the face normal is positive
/// (low_to_high; negative for high_to_low) at some shared vertex.
bool transition_feasible_full(const LinearSystem& sys, const Face& face,
                              const LatticePartition& part, Direction dir);

/// Single-vertex test: evaluates the face extremum of the normal flow in
/// O(nnz(row k)) as a_k.v0 plus the epsilon-scaled positive (negative)
/// off-diagonal row sum. Agrees exactly with the exhaustive test.
bool transition_feasible_fast(const LinearSystem& sys, const Face& face,
                              const LatticePartition& part, Direction dir);

struct LatticeOptions {
  bool self_loops = true;
  bool use_full_test = false;  // exhaustive variant, for cross-checking
  std::uint64_t cell_budget = 1000000;
};

/// One state per cell (identity outputs, names c<i0>_<i1>_...), edges per
/// feasible adjacent crossing in each direction. The box boundary is
/// absorbing. Throws BudgetError when the cell count exceeds the budget.
TransitionSystem build_lattice_abstraction(const LinearSystem& sys, const LatticePartition& part,
                                           const LatticeOptions& opts = {});

/// Cell centers in the state order used by build_lattice_abstraction.
std::vector<std::vector<double>> lattice_cell_centers(const LatticePartition& part);

}  // namespace habs
