#pragma once

#include <jamnull/numerics.hpp>

namespace jamnull::test_support {

/// Hermitian PSD matrix Q diag(lambda) Q^H with a Haar Q, so the spectrum is
/// known by construction.
inline ComplexMatrix psd_with_spectrum(Rng& rng, const RealVector& lambda) {
    const auto n = lambda.size();
    const ComplexMatrix q = random_orthonormal_columns(rng, n, n);
    ComplexMatrix m = q * lambda.cast<cplx>().asDiagonal() * q.adjoint();
    return (m + m.adjoint()) * 0.5;
}

inline ComplexMatrix random_psd(Rng& rng, Eigen::Index n) {
    const ComplexMatrix g = complex_gaussian_matrix(rng, n, n + 2);
    ComplexMatrix m = g * g.adjoint();
    return (m + m.adjoint()) * 0.5;
}

} // namespace jamnull::test_support
