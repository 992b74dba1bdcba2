#include "rwre/linalg.hpp"

#include <cmath>

#include "rwre/error.hpp"

namespace rwre {

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Mat Mat::transposed() const {
  Mat t(cols, rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
  return t;
}

Mat mat_mul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw UsageError("matrix product dimension mismatch");
  Mat z(x.rows, y.cols);
  for (int r = 0; r < x.rows; ++r) {
    for (int k = 0; k < x.cols; ++k) {
      const double v = x.at(r, k);
      if (v == 0.0) continue;
      for (int c = 0; c < y.cols; ++c) z.at(r, c) += v * y.at(k, c);
    }
  }
  return z;
}

std::vector<double> mat_vec(const Mat& x, std::span<const double> v) {
  if (x.cols != static_cast<int>(v.size())) throw UsageError("matrix-vector dimension mismatch");
  std::vector<double> out(static_cast<size_t>(x.rows), 0.0);
  for (int r = 0; r < x.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < x.cols; ++c) s += x.at(r, c) * v[static_cast<size_t>(c)];
    out[static_cast<size_t>(r)] = s;
  }
  return out;
}

std::vector<double> lu_solve(Mat a, std::vector<double> b) {
  const int n = a.rows;
  if (a.cols != n || static_cast<int>(b.size()) != n)
    throw UsageError("lu_solve needs a square system");
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a.at(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) throw UsageError("singular linear system");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a.at(pivot, c), a.at(col, c));
      std::swap(b[static_cast<size_t>(pivot)], b[static_cast<size_t>(col)]);
    }
    const double inv = 1.0 / a.at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = a.at(r, col) * inv;
      if (f == 0.0) continue;
      a.at(r, col) = 0.0;
      for (int c = col + 1; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
      b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<size_t>(r)];
    for (int c = r + 1; c < n; ++c) s -= a.at(r, c) * x[static_cast<size_t>(c)];
    x[static_cast<size_t>(r)] = s / a.at(r, r);
  }
  return x;
}

std::vector<double> stationary_distribution(const Mat& p) {
  const int n = p.rows;
  if (p.cols != n) throw UsageError("transition matrix must be square");
  if (n == 1) return {1.0};
  // (I - P^T) s = 0 with the last equation replaced by sum s = 1
  Mat m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m.at(r, c) = (r == c ? 1.0 : 0.0) - p.at(c, r);
  std::vector<double> b(static_cast<size_t>(n), 0.0);
  for (int c = 0; c < n; ++c) m.at(n - 1, c) = 1.0;
  b[static_cast<size_t>(n - 1)] = 1.0;
  return lu_solve(std::move(m), std::move(b));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace rwre
