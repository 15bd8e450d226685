#pragma once

#include <span>

#include "smoothlab/grid.hpp"

namespace smoothlab {

/// Unitary, centred n-d DFT in place:
///   forward  c_k = N^{-1/2} sum_j u_j exp(-i xi_k . x_j)
///   inverse  u_j = N^{-1/2} sum_k c_k exp(+i xi_k . x_j)
/// with x_j the physical grid coordinates (origin at the torus centre). The centring
/// keeps coefficients smooth in xi for fields localised near x = 0.
void fft_forward(const GridSpec& grid, std::span<cplx> data);
void fft_inverse(const GridSpec& grid, std::span<cplx> data);

}  // namespace smoothlab
