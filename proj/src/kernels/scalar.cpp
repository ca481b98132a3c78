#include <limits>

#include "placeorigin/kernels/kernels.hpp"

namespace placeorigin::kernels {

namespace {

double dot_scalar(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double sqdist_scalar(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

double maxsim_scalar(const float* query, std::size_t query_rows,
                     const float* doc, std::size_t doc_rows, std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < query_rows; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < doc_rows; ++j) {
      const double s = dot_scalar(query + i * dim, doc + j * dim, dim);
      if (s > best) best = s;
    }
    total += best;
  }
  return total;
}

constexpr KernelSet kScalar{"scalar", dot_scalar, sqdist_scalar, maxsim_scalar};

}  // namespace

const KernelSet& scalar() { return kScalar; }

}  // namespace placeorigin::kernels
