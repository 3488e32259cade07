#include "linear.hpp"

#include <stdexcept>

namespace cdm::detail {

BlockSpdSystem::BlockSpdSystem(int size, const std::vector<std::vector<int>>& blocks)
    : size_(size) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < size; ++i) triplets.emplace_back(i, i, 0.0);
  for (const auto& b : blocks) {
    for (int r : b) {
      for (int c : b) {
        if (r >= 0 && c >= 0 && r >= c) triplets.emplace_back(r, c, 0.0);
      }
    }
  }
  matrix_.resize(size, size);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
  const double* base = matrix_.valuePtr();
  block_offset_.reserve(blocks.size());
  for (const auto& b : blocks) {
    const int n = static_cast<int>(b.size());
    block_offset_.push_back(static_cast<int>(slots_.size()));
    block_dim_.push_back(n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const int gr = b[r];
        const int gc = b[c];
        if (gr < 0 || gc < 0 || gr < gc) {
          slots_.push_back(-1);
        } else {
          slots_.push_back(static_cast<int>(&matrix_.coeffRef(gr, gc) - base));
        }
      }
    }
  }
  diagonal_slot_.resize(size);
  for (int i = 0; i < size; ++i) {
    diagonal_slot_[i] = static_cast<int>(&matrix_.coeffRef(i, i) - base);
  }
  ldlt_.analyzePattern(matrix_);
}

void BlockSpdSystem::zero() {
  std::fill(matrix_.valuePtr(), matrix_.valuePtr() + matrix_.nonZeros(), 0.0);
}

void BlockSpdSystem::add(int block, std::span<const double> values) {
  const int n = block_dim_[block];
  const int* slot = slots_.data() + block_offset_[block];
  double* v = matrix_.valuePtr();
  for (int k = 0; k < n * n; ++k) {
    if (slot[k] >= 0) v[slot[k]] += values[k];
  }
}

void BlockSpdSystem::add_diagonal(int index, double value) {
  matrix_.valuePtr()[diagonal_slot_[index]] += value;
}

bool BlockSpdSystem::factorize() {
  if (size_ == 0) return true;
  ldlt_.factorize(matrix_);
  if (ldlt_.info() != Eigen::Success) return false;
  const auto d = ldlt_.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) return false;
  }
  return true;
}

Eigen::VectorXd BlockSpdSystem::solve(const Eigen::VectorXd& rhs) const {
  if (size_ == 0) return rhs;
  return ldlt_.solve(rhs);
}

}  // namespace cdm::detail
