#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "biot/errors.hpp"
#include "biot/vector_ops.hpp"

namespace biot {

/// Minimal abstract interface shared by matrices, block operators and
/// preconditioners: a square real linear (or, for flexible methods,
/// iteration-dependent) map y = Op(x).
class Operator {
 public:
  virtual ~Operator() = default;
  virtual int rows() const = 0;
  virtual int cols() const { return rows(); }
  virtual void apply(const Vector& x, Vector& y) const = 0;

  Vector apply(const Vector& x) const {
    Vector y(static_cast<std::size_t>(rows()));
    apply(x, y);
    return y;
  }
};

/// Compressed sparse row matrix. Immutable after construction; build through
/// CooBuilder and friends.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
            std::vector<double> vals);

  static CsrMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return vals_.size(); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return vals_; }

  /// y = A x. Accumulates each row in index order, so results are
  /// bitwise reproducible across runs.
  void apply(const Vector& x, Vector& y) const;
  Vector apply(const Vector& x) const;

  /// y = A^T x without forming the transpose.
  void apply_transpose(const Vector& x, Vector& y) const;
  Vector apply_transpose(const Vector& x) const;

  double quadratic_form(const Vector& x) const;  // x^T A x

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> vals_;
};

/// Coordinate-format staging area; compress() sorts entries row-major and
/// merges duplicates by summation.
class CooBuilder {
 public:
  CooBuilder(int rows, int cols);

  void add(int i, int j, double v);
  void reserve(std::size_t n) { entries_.reserve(n); }

  CsrMatrix compress() &&;

 private:
  struct Entry {
    int i, j;
    double v;
  };
  int rows_, cols_;
  std::vector<Entry> entries_;
};

/// sum_k coeff_k * M_k, plus a unit diagonal on the listed rows. All terms
/// must share one shape; the unit rows must hold no other contribution
/// (their entries in every term are expected to be structurally absent or
/// zero, as produced by constrained-dof elimination).
CsrMatrix csr_weighted_sum(const std::vector<std::pair<double, const CsrMatrix*>>& terms,
                           const std::vector<int>& unit_diag_rows = {});

/// Adapter so a CsrMatrix can be passed where an Operator is expected.
class CsrOperator final : public Operator {
 public:
  explicit CsrOperator(const CsrMatrix& m) : m_(&m) {}
  int rows() const override { return m_->rows(); }
  int cols() const override { return m_->cols(); }
  void apply(const Vector& x, Vector& y) const override { m_->apply(x, y); }

 private:
  const CsrMatrix* m_;
};

/// Two-by-two block operator for the coupled displacement/pressure system
///
///   [ A_uu           c_B B^T ]  [u]
///   [ c_B B   -(tau A_pp + eta_h2 L_pp) ]  [p]
///
/// with an optional sign flip of the second block row (the triangular
/// preconditioners pair with the flipped, positive-definite-symmetric-part
/// form). Rows listed in `row2_identity` act as +/- identity instead: the
/// pressure blocks carry zero rows/columns at constrained dofs, and the
/// identity contribution is added here so that no time-step scalar touches
/// a constrained equation.
class BlockOperator final : public Operator {
 public:
  BlockOperator(const CsrMatrix& A_uu, const CsrMatrix& B, const CsrMatrix& A_pp,
                const CsrMatrix& L_pp, double c_B, double tau, double eta_h2,
                std::vector<int> row2_identity, bool negate_second_row);

  int rows() const override { return n_u_ + n_p_; }
  void apply(const Vector& x, Vector& y) const override;

  bool negated() const { return negate_; }
  int n_u() const { return n_u_; }
  int n_p() const { return n_p_; }

  /// Monolithic CSR form with identical entries to apply(); used by direct
  /// solvers and dense analysis.
  CsrMatrix to_csr() const;

  /// Flips the sign of the trailing n_p entries of a stacked vector, the
  /// right-hand-side counterpart of negate_second_row.
  static void negate_pressure_rows(Vector& stacked, int n_p);

 private:
  const CsrMatrix* A_uu_;
  const CsrMatrix* B_;
  const CsrMatrix* A_pp_;
  const CsrMatrix* L_pp_;
  double c_B_, tau_, eta_h2_;
  std::vector<int> row2_identity_;
  bool negate_;
  int n_u_, n_p_;
};

/// Matrix Market coordinate-format export with 17 significant digits
/// (lossless for binary64) and 1-based indices.
void write_matrix_market(const CsrMatrix& m, std::ostream& out);
void write_matrix_market(const CsrMatrix& m, const std::string& path);

CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::string& path);

}  // namespace biot
