#pragma once

#include <cstdint>

namespace poseidon {

// Row-major double GEMM kernels. All of them parallelize over rows of C,
// each output element is produced by one worker with a fixed serial inner
// order, so results do not depend on the job count.

// C = A(MxK) * B(KxN), C is MxN. If accumulate, C += instead of C =.
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k,
             const double* a, const double* b, double* c, bool accumulate);

// C = A(MxK) * B(NxK)^T
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k,
             const double* a, const double* b, double* c, bool accumulate);

// C = A(KxM)^T * B(KxN)
void gemm_tn(std::int64_t m, std::int64_t n, std::int64_t k,
             const double* a, const double* b, double* c, bool accumulate);

} // namespace poseidon
