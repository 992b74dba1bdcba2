#pragma once

#include <span>
#include <vector>

namespace rwre {

// Small dense row-major matrix; sized for phase chains (<= a few dozen
// states) and d x d covariance blocks.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  static Mat identity(int n);
  Mat transposed() const;
};

Mat mat_mul(const Mat& x, const Mat& y);
std::vector<double> mat_vec(const Mat& x, std::span<const double> v);

// Gaussian elimination with partial pivoting; throws UsageError on a
// (numerically) singular system.
std::vector<double> lu_solve(Mat a, std::vector<double> b);

// Stationary row vector of a row-stochastic matrix: solves s^T P = s^T,
// sum s = 1.
std::vector<double> stationary_distribution(const Mat& p);

double dot(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> v);

// Numerically stable running sum.
struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace rwre
