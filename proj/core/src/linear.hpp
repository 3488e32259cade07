#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <span>
#include <vector>

namespace cdm::detail {

/// Symmetric positive definite system with a fixed sparsity pattern made of
/// dense element blocks. Constrained DoFs (index -1) are dropped; the pattern
/// is analyzed once and only numeric factorizations follow.
class BlockSpdSystem {
 public:
  /// `blocks[b]` lists the compact indices of block b (-1 for eliminated).
  BlockSpdSystem(int size, const std::vector<std::vector<int>>& blocks);

  int size() const { return size_; }
  void zero();
  /// Adds a dense row-major block matrix to block b.
  void add(int block, std::span<const double> values);
  /// Adds to a single diagonal entry.
  void add_diagonal(int index, double value);
  bool factorize();
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  int size_ = 0;
  Eigen::SparseMatrix<double> matrix_;
  std::vector<int> block_offset_;
  std::vector<int> block_dim_;
  std::vector<int> slots_;
  std::vector<int> diagonal_slot_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
};

}  // namespace cdm::detail
