#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nozzle::linalg {

using Vector = std::vector<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; explicit zeros are allowed.
class CsrMatrix {
public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols);
  CsrMatrix(int rows, int cols, std::vector<int> offsets, std::vector<int> columns,
            std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> offsets() const { return offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Stored value at (i, j), zero when the entry is not in the pattern.
  double at(int i, int j) const;
  /// Pointer to the stored entry or nullptr.
  double *find(int i, int j);

  void multiply(std::span<const double> x, std::span<double> y) const;
  void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;

  CsrMatrix transpose() const;
  double norm_inf() const;
  bool is_valid() const;

  /// this + alpha * other; patterns are merged.
  CsrMatrix add(const CsrMatrix &other, double alpha = 1.0) const;
  CsrMatrix scaled(double alpha) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Builds a CSR matrix, summing duplicate entries. Throws InvalidParameter on
/// an index outside the shape.
CsrMatrix csr_from_triplets(int rows, int cols, std::span<const Triplet> triplets);

CsrMatrix identity(int n);

/// Stacks [a b; c d] into one matrix; empty blocks may be default matrices
/// of the right implied shape.
CsrMatrix block_matrix(const CsrMatrix &a, const CsrMatrix &b, const CsrMatrix &c,
                       const CsrMatrix *d = nullptr);

double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

/// Matrix Market coordinate (real general) output and input.
void write_matrix_market(std::ostream &out, const CsrMatrix &a);
void save_matrix_market(const std::string &path, const CsrMatrix &a);
CsrMatrix read_matrix_market(std::istream &in);

} // namespace nozzle::linalg
