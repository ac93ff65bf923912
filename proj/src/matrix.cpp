#include "febaa/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "febaa/error.hpp"

namespace febaa {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: row count mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto arow = a.row(k);
    const auto brow = b.row(k);
    for (std::size_t i = 0; i < arow.size(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < brow.size(); ++j) dst[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt: column count mismatch");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto brow = b.row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < arow.size(); ++k) sum += arow[k] * brow[k];
      out(i, j) = sum;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void add_scaled(Matrix& dst, const Matrix& src, double scale) {
  require(dst.rows() == src.rows() && dst.cols() == src.cols(),
          "add_scaled: shape mismatch");
  auto d = dst.values();
  const auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

double frobenius_sq(const Matrix& a) {
  double sum = 0.0;
  for (double v : a.values()) sum += v * v;
  return sum;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.values().begin(), a.values().end(),
                     [](double v) { return std::isfinite(v); });
}

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                     std::vector<std::uint32_t> col_idx,
                     std::vector<double> values)
    : n_(n),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  require(row_ptr_.size() == n_ + 1, "csr: row_ptr must have n+1 entries");
  require(col_idx_.size() == values_.size(), "csr: col/value length mismatch");
  require(row_ptr_.back() == values_.size(), "csr: row_ptr does not cover nnz");
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(c));
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Matrix CsrMatrix::multiply(const Matrix& dense) const {
  require(dense.rows() == n_, "csr multiply: dimension mismatch");
  Matrix out(n_, dense.cols());
  for (std::size_t i = 0; i < n_; ++i) {
    auto dst = out.row(i);
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const double w = values_[p];
      const auto src = dense.row(col_idx_[p]);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

Matrix CsrMatrix::to_dense() const {
  Matrix out(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      out(i, col_idx_[p]) = values_[p];
  return out;
}

}  // namespace febaa
