#include "biot/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace biot {

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                     std::vector<double> vals)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      vals_(std::move(vals)) {
  if (rows_ < 0 || cols_ < 0) throw ShapeError("CsrMatrix: negative dimension");
  if (row_ptr_.size() != static_cast<std::size_t>(rows_) + 1)
    throw ShapeError("CsrMatrix: row_ptr length must be rows+1");
  if (row_ptr_.front() != 0 || row_ptr_.back() != static_cast<int>(vals_.size()))
    throw ShapeError("CsrMatrix: row_ptr bounds do not match value count");
  if (col_idx_.size() != vals_.size()) throw ShapeError("CsrMatrix: col_idx/vals length mismatch");
  for (int r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw ShapeError("CsrMatrix: row_ptr not nondecreasing");
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] < 0 || col_idx_[k] >= cols_) throw ShapeError("CsrMatrix: column index out of range");
      if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1])
        throw ShapeError("CsrMatrix: columns not strictly increasing within a row");
    }
  }
}

CsrMatrix CsrMatrix::identity(int n) {
  std::vector<int> rp(static_cast<std::size_t>(n) + 1), ci(n);
  std::vector<double> v(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i <= n; ++i) rp[i] = i;
  for (int i = 0; i < n; ++i) ci[i] = i;
  return CsrMatrix(n, n, std::move(rp), std::move(ci), std::move(v));
}

void CsrMatrix::apply(const Vector& x, Vector& y) const {
  if (x.size() != static_cast<std::size_t>(cols_)) throw ShapeError("CsrMatrix::apply: x size mismatch");
  y.assign(static_cast<std::size_t>(rows_), 0.0);
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
    y[r] = s;
  }
}

Vector CsrMatrix::apply(const Vector& x) const {
  Vector y;
  apply(x, y);
  return y;
}

void CsrMatrix::apply_transpose(const Vector& x, Vector& y) const {
  if (x.size() != static_cast<std::size_t>(rows_))
    throw ShapeError("CsrMatrix::apply_transpose: x size mismatch");
  y.assign(static_cast<std::size_t>(cols_), 0.0);
  for (int r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += vals_[k] * xr;
  }
}

Vector CsrMatrix::apply_transpose(const Vector& x) const {
  Vector y;
  apply_transpose(x, y);
  return y;
}

double CsrMatrix::quadratic_form(const Vector& x) const {
  if (rows_ != cols_) throw ShapeError("quadratic_form: matrix not square");
  Vector y;
  apply(x, y);
  return dot(x, y);
}

CooBuilder::CooBuilder(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("CooBuilder: negative dimension");
}

void CooBuilder::add(int i, int j, double v) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw ShapeError("CooBuilder::add: index out of range");
  entries_.push_back({i, j, v});
}

CsrMatrix CooBuilder::compress() && {
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<int> rp(static_cast<std::size_t>(rows_) + 1, 0), ci;
  std::vector<double> vals;
  ci.reserve(entries_.size());
  vals.reserve(entries_.size());
  std::size_t k = 0;
  while (k < entries_.size()) {
    const int i = entries_[k].i, j = entries_[k].j;
    double s = 0.0;
    while (k < entries_.size() && entries_[k].i == i && entries_[k].j == j) s += entries_[k++].v;
    ci.push_back(j);
    vals.push_back(s);
    ++rp[i + 1];
  }
  for (int r = 0; r < rows_; ++r) rp[r + 1] += rp[r];
  return CsrMatrix(rows_, cols_, std::move(rp), std::move(ci), std::move(vals));
}

CsrMatrix csr_weighted_sum(const std::vector<std::pair<double, const CsrMatrix*>>& terms,
                           const std::vector<int>& unit_diag_rows) {
  if (terms.empty()) throw ShapeError("csr_weighted_sum: no terms");
  const int rows = terms.front().second->rows();
  const int cols = terms.front().second->cols();
  std::size_t total = unit_diag_rows.size();
  for (const auto& [c, m] : terms) {
    (void)c;
    if (m->rows() != rows || m->cols() != cols) throw ShapeError("csr_weighted_sum: shape mismatch");
    total += m->nnz();
  }
  CooBuilder coo(rows, cols);
  coo.reserve(total);
  for (const auto& [c, m] : terms) {
    const auto& rp = m->row_ptr();
    const auto& ci = m->col_idx();
    const auto& v = m->values();
    for (int r = 0; r < rows; ++r)
      for (int k = rp[r]; k < rp[r + 1]; ++k) coo.add(r, ci[k], c * v[k]);
  }
  for (int r : unit_diag_rows) coo.add(r, r, 1.0);
  return std::move(coo).compress();
}

BlockOperator::BlockOperator(const CsrMatrix& A_uu, const CsrMatrix& B, const CsrMatrix& A_pp,
                             const CsrMatrix& L_pp, double c_B, double tau, double eta_h2,
                             std::vector<int> row2_identity, bool negate_second_row)
    : A_uu_(&A_uu), B_(&B), A_pp_(&A_pp), L_pp_(&L_pp), c_B_(c_B), tau_(tau), eta_h2_(eta_h2),
      row2_identity_(std::move(row2_identity)), negate_(negate_second_row), n_u_(A_uu.rows()),
      n_p_(A_pp.rows()) {
  if (A_uu.rows() != A_uu.cols() || A_pp.rows() != A_pp.cols() || L_pp.rows() != L_pp.cols())
    throw ShapeError("BlockOperator: diagonal blocks must be square");
  if (B.rows() != n_p_ || B.cols() != n_u_) throw ShapeError("BlockOperator: coupling block shape mismatch");
  if (L_pp.rows() != n_p_) throw ShapeError("BlockOperator: pressure block shape mismatch");
  for (int i : row2_identity_)
    if (i < 0 || i >= n_p_) throw ShapeError("BlockOperator: identity row out of range");
}

void BlockOperator::apply(const Vector& x, Vector& y) const {
  if (x.size() != static_cast<std::size_t>(n_u_ + n_p_)) throw ShapeError("BlockOperator::apply: x size mismatch");
  y.assign(x.size(), 0.0);
  const Vector u(x.begin(), x.begin() + n_u_);
  const Vector p(x.begin() + n_u_, x.end());

  Vector t(static_cast<std::size_t>(n_u_));
  A_uu_->apply(u, t);
  for (int i = 0; i < n_u_; ++i) y[i] = t[i];
  B_->apply_transpose(p, t);
  for (int i = 0; i < n_u_; ++i) y[i] += c_B_ * t[i];

  Vector s(static_cast<std::size_t>(n_p_)), w(static_cast<std::size_t>(n_p_));
  B_->apply(u, s);
  A_pp_->apply(p, w);
  for (int i = 0; i < n_p_; ++i) s[i] = c_B_ * s[i] - tau_ * w[i];
  L_pp_->apply(p, w);
  for (int i = 0; i < n_p_; ++i) s[i] -= eta_h2_ * w[i];
  for (int i : row2_identity_) s[i] -= p[i];
  const double sign = negate_ ? -1.0 : 1.0;
  for (int i = 0; i < n_p_; ++i) y[n_u_ + i] = sign * s[i];
}

CsrMatrix BlockOperator::to_csr() const {
  const int n = n_u_ + n_p_;
  CooBuilder coo(n, n);
  coo.reserve(A_uu_->nnz() + 2 * B_->nnz() + A_pp_->nnz() + L_pp_->nnz() + row2_identity_.size());
  const double sign = negate_ ? -1.0 : 1.0;
  auto scatter = [&coo](const CsrMatrix& m, int roff, int coff, double c, bool transpose) {
    const auto& rp = m.row_ptr();
    const auto& ci = m.col_idx();
    const auto& v = m.values();
    for (int r = 0; r < m.rows(); ++r)
      for (int k = rp[r]; k < rp[r + 1]; ++k) {
        if (transpose)
          coo.add(ci[k] + roff, r + coff, c * v[k]);
        else
          coo.add(r + roff, ci[k] + coff, c * v[k]);
      }
  };
  scatter(*A_uu_, 0, 0, 1.0, false);
  scatter(*B_, 0, n_u_, c_B_, true);  // upper-right block holds c_B * B^T
  scatter(*B_, n_u_, 0, sign * c_B_, false);
  scatter(*A_pp_, n_u_, n_u_, -sign * tau_, false);
  scatter(*L_pp_, n_u_, n_u_, -sign * eta_h2_, false);
  for (int i : row2_identity_) coo.add(n_u_ + i, n_u_ + i, -sign);
  return std::move(coo).compress();
}

void BlockOperator::negate_pressure_rows(Vector& stacked, int n_p) {
  if (static_cast<int>(stacked.size()) < n_p) throw ShapeError("negate_pressure_rows: vector too short");
  for (std::size_t i = stacked.size() - static_cast<std::size_t>(n_p); i < stacked.size(); ++i)
    stacked[i] = -stacked[i];
}

void write_matrix_market(const CsrMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nnz() << "\n";
  char buf[64];
  const auto& rp = m.row_ptr();
  const auto& ci = m.col_idx();
  const auto& v = m.values();
  for (int r = 0; r < m.rows(); ++r)
    for (int k = rp[r]; k < rp[r + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r + 1, ci[k] + 1, v[k]);
      out << buf;
    }
  if (!out) throw IoError("write_matrix_market: stream failure");
}

void write_matrix_market(const CsrMatrix& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_matrix_market: cannot open " + path);
  write_matrix_market(m, f);
}

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("read_matrix_market: empty stream");
  if (line.rfind("%%MatrixMarket", 0) != 0) throw IoError("read_matrix_market: missing header");
  {
    std::istringstream hs(line);
    std::string tag, object, format, field, symmetry;
    hs >> tag >> object >> format >> field >> symmetry;
    if (object != "matrix" || format != "coordinate" || field != "real" || symmetry != "general")
      throw IoError("read_matrix_market: unsupported header: " + line);
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream dims(line);
  long long rows = -1, cols = -1, nnz = -1;
  dims >> rows >> cols >> nnz;
  if (rows < 0 || cols < 0 || nnz < 0) throw IoError("read_matrix_market: bad size line");
  CooBuilder coo(static_cast<int>(rows), static_cast<int>(cols));
  coo.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    long long i = 0, j = 0;
    double val = 0.0;
    if (!(in >> i >> j >> val)) throw IoError("read_matrix_market: truncated entry list");
    if (i < 1 || i > rows || j < 1 || j > cols) throw IoError("read_matrix_market: index out of range");
    coo.add(static_cast<int>(i - 1), static_cast<int>(j - 1), val);
  }
  return std::move(coo).compress();
}

CsrMatrix read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("read_matrix_market: cannot open " + path);
  return read_matrix_market(f);
}

}  // namespace biot
