#include "poseidon/gemm.hpp"

#include <cstring>

#include "poseidon/parallel.hpp"

namespace poseidon {

namespace {
// Rough element-op threshold below which threading is not worth a spawn.
constexpr std::int64_t kParGrainOps = 262144;

std::int64_t row_grain(std::int64_t m, std::int64_t ops_per_row) {
    std::int64_t g = kParGrainOps / (ops_per_row + 1);
    if (g < 1) g = 1;
    if (g > m) g = m;
    return g;
}
} // namespace

void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k,
             const double* a, const double* b, double* c, bool accumulate) {
    par::parallel_for(m, row_grain(m, n * k), [&](std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) {
            double* ci = c + i * n;
            if (!accumulate) std::memset(ci, 0, sizeof(double) * static_cast<size_t>(n));
            const double* ai = a + i * k;
            for (std::int64_t p = 0; p < k; ++p) {
                const double av = ai[p];
                if (av == 0.0) continue;
                const double* bp = b + p * n;
                for (std::int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
            }
        }
    });
}

void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k,
             const double* a, const double* b, double* c, bool accumulate) {
    par::parallel_for(m, row_grain(m, n * k), [&](std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) {
            const double* ai = a + i * k;
            double* ci = c + i * n;
            for (std::int64_t j = 0; j < n; ++j) {
                const double* bj = b + j * k;
                double acc = 0.0;
                for (std::int64_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
                ci[j] = accumulate ? ci[j] + acc : acc;
            }
        }
    });
}

void gemm_tn(std::int64_t m, std::int64_t n, std::int64_t k,
             const double* a, const double* b, double* c, bool accumulate) {
    par::parallel_for(m, row_grain(m, n * k), [&](std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) {
            double* ci = c + i * n;
            if (!accumulate) std::memset(ci, 0, sizeof(double) * static_cast<size_t>(n));
            for (std::int64_t p = 0; p < k; ++p) {
                const double av = a[p * m + i];
                if (av == 0.0) continue;
                const double* bp = b + p * n;
                for (std::int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
            }
        }
    });
}

} // namespace poseidon
