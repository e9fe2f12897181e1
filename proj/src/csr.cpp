#include "nozzle/csr.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace nozzle::linalg {

CsrMatrix::CsrMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<int> offsets,
                     std::vector<int> columns, std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(offsets)),
      columns_(std::move(columns)), values_(std::move(values)) {
  if (!is_valid())
    fail(ErrorKind::InvalidParameter, "CsrMatrix: inconsistent CSR arrays");
}

bool CsrMatrix::is_valid() const {
  if (offsets_.size() != static_cast<std::size_t>(rows_) + 1 || offsets_.front() != 0)
    return false;
  if (static_cast<std::size_t>(offsets_.back()) != columns_.size() ||
      columns_.size() != values_.size())
    return false;
  for (int i = 0; i < rows_; ++i) {
    if (offsets_[i] > offsets_[i + 1])
      return false;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (columns_[k] < 0 || columns_[k] >= cols_)
        return false;
      if (k > offsets_[i] && columns_[k] <= columns_[k - 1])
        return false;
    }
  }
  return true;
}

double CsrMatrix::at(int i, int j) const {
  const auto begin = columns_.begin() + offsets_[i];
  const auto end = columns_.begin() + offsets_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  return (it != end && *it == j) ? values_[it - columns_.begin()] : 0.0;
}

double *CsrMatrix::find(int i, int j) {
  const auto begin = columns_.begin() + offsets_[i];
  const auto end = columns_.begin() + offsets_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  return (it != end && *it == j) ? &values_[it - columns_.begin()] : nullptr;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k)
      sum += values_[k] * x[columns_[k]];
    y[i] = sum;
  }
}

void CsrMatrix::multiply_add(std::span<const double> x, std::span<double> y,
                             double alpha) const {
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k)
      sum += values_[k] * x[columns_[k]];
    y[i] += alpha * sum;
  }
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < rows_; ++i)
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k)
      y[columns_[k]] += values_[k] * x[i];
}

Vector CsrMatrix::operator*(std::span<const double> x) const {
  Vector y(rows_);
  multiply(x, y);
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<int> offsets(static_cast<std::size_t>(cols_) + 1, 0);
  for (int c : columns_)
    ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<int> columns(columns_.size());
  std::vector<double> values(values_.size());
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (int i = 0; i < rows_; ++i)
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const int pos = fill[columns_[k]]++;
      columns[pos] = i;
      values[pos] = values_[k];
    }
  return CsrMatrix(cols_, rows_, std::move(offsets), std::move(columns), std::move(values));
}

double CsrMatrix::norm_inf() const {
  double best = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k)
      sum += std::abs(values_[k]);
    best = std::max(best, sum);
  }
  return best;
}

CsrMatrix CsrMatrix::add(const CsrMatrix &other, double alpha) const {
  if (other.rows_ != rows_ || other.cols_ != cols_)
    fail(ErrorKind::InvalidParameter, "CsrMatrix::add: shape mismatch");
  std::vector<int> offsets(static_cast<std::size_t>(rows_) + 1, 0);
  std::vector<int> columns;
  std::vector<double> values;
  columns.reserve(nnz() + other.nnz());
  values.reserve(nnz() + other.nnz());
  for (int i = 0; i < rows_; ++i) {
    int a = offsets_[i], b = other.offsets_[i];
    const int ae = offsets_[i + 1], be = other.offsets_[i + 1];
    while (a < ae || b < be) {
      if (b >= be || (a < ae && columns_[a] < other.columns_[b])) {
        columns.push_back(columns_[a]);
        values.push_back(values_[a++]);
      } else if (a >= ae || other.columns_[b] < columns_[a]) {
        columns.push_back(other.columns_[b]);
        values.push_back(alpha * other.values_[b++]);
      } else {
        columns.push_back(columns_[a]);
        values.push_back(values_[a++] + alpha * other.values_[b++]);
      }
    }
    offsets[i + 1] = static_cast<int>(columns.size());
  }
  return CsrMatrix(rows_, cols_, std::move(offsets), std::move(columns), std::move(values));
}

CsrMatrix CsrMatrix::scaled(double alpha) const {
  CsrMatrix out = *this;
  for (double &v : out.values_)
    v *= alpha;
  return out;
}

CsrMatrix csr_from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
  if (rows < 0 || cols < 0)
    fail(ErrorKind::InvalidParameter, "csr_from_triplets: negative shape");
  std::vector<int> offsets(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto &t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      fail(ErrorKind::InvalidParameter,
           "csr_from_triplets: entry (" + std::to_string(t.row) + ", " +
               std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
               std::to_string(cols));
    ++offsets[t.row + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::pair<int, double>> bucket(triplets.size());
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (const auto &t : triplets)
    bucket[fill[t.row]++] = {t.col, t.value};

  std::vector<int> out_offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> columns;
  std::vector<double> values;
  columns.reserve(triplets.size());
  values.reserve(triplets.size());
  for (int i = 0; i < rows; ++i) {
    auto begin = bucket.begin() + offsets[i], end = bucket.begin() + offsets[i + 1];
    std::stable_sort(begin, end, [](const auto &x, const auto &y) { return x.first < y.first; });
    for (auto it = begin; it != end; ++it) {
      if (!columns.empty() && static_cast<int>(columns.size()) > out_offsets[i] &&
          columns.back() == it->first)
        values.back() += it->second;
      else {
        columns.push_back(it->first);
        values.push_back(it->second);
      }
    }
    out_offsets[i + 1] = static_cast<int>(columns.size());
  }
  return CsrMatrix(rows, cols, std::move(out_offsets), std::move(columns), std::move(values));
}

CsrMatrix identity(int n) {
  std::vector<int> offsets(static_cast<std::size_t>(n) + 1);
  std::vector<int> columns(n);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::iota(columns.begin(), columns.end(), 0);
  return CsrMatrix(n, n, std::move(offsets), std::move(columns), std::vector<double>(n, 1.0));
}

CsrMatrix block_matrix(const CsrMatrix &a, const CsrMatrix &b, const CsrMatrix &c,
                       const CsrMatrix *d) {
  const int n1 = a.rows(), m1 = a.cols();
  const int n2 = c.rows(), m2 = b.cols();
  if (b.rows() != n1 || c.cols() != m1 || (d && (d->rows() != n2 || d->cols() != m2)))
    fail(ErrorKind::InvalidParameter, "block_matrix: inconsistent block shapes");
  std::vector<int> offsets(static_cast<std::size_t>(n1 + n2) + 1, 0);
  std::vector<int> columns;
  std::vector<double> values;
  columns.reserve(a.nnz() + b.nnz() + c.nnz() + (d ? d->nnz() : 0));
  values.reserve(columns.capacity());
  auto append_row = [&](const CsrMatrix &m, int i, int shift) {
    for (int k = m.offsets()[i]; k < m.offsets()[i + 1]; ++k) {
      columns.push_back(m.columns()[k] + shift);
      values.push_back(m.values()[k]);
    }
  };
  for (int i = 0; i < n1; ++i) {
    append_row(a, i, 0);
    append_row(b, i, m1);
    offsets[i + 1] = static_cast<int>(columns.size());
  }
  for (int i = 0; i < n2; ++i) {
    append_row(c, i, 0);
    if (d)
      append_row(*d, i, m1);
    offsets[n1 + i + 1] = static_cast<int>(columns.size());
  }
  return CsrMatrix(n1 + n2, m1 + m2, std::move(offsets), std::move(columns), std::move(values));
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x)
    m = std::max(m, std::abs(v));
  return m;
}

void write_matrix_market(std::ostream &out, const CsrMatrix &a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k)
      out << i + 1 << ' ' << a.columns()[k] + 1 << ' ' << a.values()[k] << '\n';
}

void save_matrix_market(const std::string &path, const CsrMatrix &a) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_matrix_market(out, a);
}

CsrMatrix read_matrix_market(std::istream &in) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
    fail(ErrorKind::Parse, "matrix market: unsupported header");
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream dims(line);
  int rows = 0, cols = 0;
  std::size_t nnz = 0;
  if (!(dims >> rows >> cols >> nnz))
    fail(ErrorKind::Parse, "matrix market: bad size line");
  std::vector<Triplet> triplets(nnz);
  for (auto &t : triplets) {
    if (!(in >> t.row >> t.col >> t.value))
      fail(ErrorKind::Parse, "matrix market: truncated entry list");
    --t.row;
    --t.col;
  }
  return csr_from_triplets(rows, cols, triplets);
}

} // namespace nozzle::linalg
