#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace placeorigin::kernels {

/// One implementation of the numeric inner loops. Inputs are float rows,
/// accumulation is always double so every variant agrees with the scalar
/// reference to ~1e-15 relative.
struct KernelSet {
  std::string_view name;
  double (*dot)(const float* a, const float* b, std::size_t n);
  double (*squared_distance)(const float* a, const float* b, std::size_t n);
  /// Sum over query rows of the max dot product against any doc row.
  /// Both matrices are row-major with `dim` columns; rows must be > 0.
  double (*maxsim)(const float* query, std::size_t query_rows,
                   const float* doc, std::size_t doc_rows, std::size_t dim);
};

const KernelSet& scalar();

/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelSet* avx2();
const KernelSet* neon();

/// Every variant usable on this machine, scalar first.
std::vector<const KernelSet*> available();

/// Best available variant. PLACEORIGIN_SIMD=scalar|avx2|neon overrides the
/// choice when that variant is available.
const KernelSet& active();

}  // namespace placeorigin::kernels
