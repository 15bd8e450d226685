#include "smoothlab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "smoothlab/error.hpp"

namespace smoothlab {

namespace {

using PlanKey = std::tuple<int, int, int, int, int>;  // dim, n0, n1, n2, sign

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    // Plans are created under a lock (the FFTW planner is not thread-safe); the
    // new-array execute interface is then safe to call concurrently.
    fftw_plan get(const GridSpec& grid, int sign) {
        const PlanKey key{grid.dimension(), grid.points(0), grid.dimension() > 1 ? grid.points(1) : 1,
                          grid.dimension() > 2 ? grid.points(2) : 1, sign};
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        int n[3] = {grid.points(0), grid.dimension() > 1 ? grid.points(1) : 1,
                    grid.dimension() > 2 ? grid.points(2) : 1};
        fftw_complex* scratch = fftw_alloc_complex(grid.size());
        fftw_plan plan = fftw_plan_dft(grid.dimension(), n, scratch, scratch, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr) throw Error(ErrorKind::invalid_argument, "FFTW could not create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

// exp(-i xi_k x_0) with x_0 = -L/2 equals (-1)^k; for even N that is (-1)^(index).
void apply_centering(const GridSpec& grid, std::span<cplx> data, double scale) {
    const std::size_t total = grid.size();
    if (grid.dimension() == 1) {
        for (std::size_t i = 0; i < total; ++i) data[i] *= (i & 1u) ? -scale : scale;
        return;
    }
    for (std::size_t i = 0; i < total; ++i) {
        const auto idx = grid.unravel(i);
        const int parity = (idx[0] + idx[1] + idx[2]) & 1;
        data[i] *= parity ? -scale : scale;
    }
}

void execute(const GridSpec& grid, std::span<cplx> data, int sign) {
    if (data.size() != grid.size())
        throw Error(ErrorKind::shape_mismatch, "transform buffer does not match grid size");
    fftw_plan plan = cache().get(grid, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void fft_forward(const GridSpec& grid, std::span<cplx> data) {
    execute(grid, data, FFTW_FORWARD);
    apply_centering(grid, data, 1.0 / std::sqrt(static_cast<double>(grid.size())));
}

void fft_inverse(const GridSpec& grid, std::span<cplx> data) {
    apply_centering(grid, data, 1.0 / std::sqrt(static_cast<double>(grid.size())));
    execute(grid, data, FFTW_BACKWARD);
}

}  // namespace smoothlab
