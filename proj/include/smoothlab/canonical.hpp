#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smoothlab/estimator.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/symbol.hpp"

namespace smoothlab {

/// Frequency change of variables psi: linear (xi -> M xi) or a radial warp
/// xi -> r(|xi|) xi / |xi| with r strictly increasing and r(0) = 0.
class FrequencyMap {
public:
    enum class Kind { linear, radial_warp };
    using Profile = std::function<double(double)>;

    static FrequencyMap identity(int dimension);
    /// Throws ErrorKind::domain for a singular matrix.
    static FrequencyMap linear(const Mat& m);
    /// r' and r^{-1} are required; `homogeneous` marks r(rho) = c rho.
    static FrequencyMap radial_warp(int dimension, Profile r, Profile dr, Profile r_inverse,
                                    bool homogeneous = false);

    Kind kind() const { return kind_; }
    int dimension() const { return dim_; }
    bool homogeneous() const { return homogeneous_; }
    const Mat& matrix() const { return m_; }

    Vec forward(const Vec& xi) const;
    Vec inverse(const Vec& eta) const;
    /// det D psi(xi).
    double jacobian_det(const Vec& xi) const;
    FrequencyMap inverted() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::linear;
    int dim_ = 0;
    Mat m_, m_inv_;
    Profile r_, dr_, r_inv_;
    bool homogeneous_ = false;
};

/// Cut-off gamma with 0 <= gamma <= 1, built from C^2 quintic ramps.
struct CutoffSpec {
    std::function<double(const Vec&)> gamma;
    std::string label;

    double operator()(const Vec& xi) const { return gamma(xi); }

    static CutoffSpec one();
    /// 1 on inner <= |xi| <= outer, 0 outside [inner - ramp, outer + ramp].
    static CutoffSpec annulus(double inner, double outer, double ramp);
    /// 1 on |xi| <= radius, 0 beyond radius + ramp.
    static CutoffSpec ball(double radius, double ramp);
    /// annulus(inner, outer, ramp) times an angular bump around `direction`:
    /// 1 within `aperture` radians, 0 beyond 2 * aperture.
    static CutoffSpec cone(const Vec& direction, double aperture, double inner, double outer, double ramp);
};

/// 0 for s <= 0, 1 for s >= 1, 6s^5 - 15s^4 + 10s^3 in between (C^2).
double quintic_ramp(double s);

/// I u = F^{-1}[gamma(xi) (F u)(psi(xi))]. Lattice images are looked up exactly;
/// other images use tensor cubic interpolation with zero data off the lattice.
/// Throws ErrorKind::domain if an image of supp gamma leaves the Nyquist box.
ComplexField apply_I(const FrequencyMap& psi, const CutoffSpec& gamma, const ComplexField& u);
/// I^{-1} u = F^{-1}[gamma(psi^{-1} xi) (F u)(psi^{-1}(xi))].
ComplexField apply_I_inverse(const FrequencyMap& psi, const CutoffSpec& gamma, const ComplexField& u);

/// C with C^{-1} <= |det D psi| <= C over the lattice points of supp gamma.
double determinant_window(const FrequencyMap& psi, const CutoffSpec& gamma, const GridSpec& grid);

struct BoundednessProbe {
    double value = 0.0;        // max over the ensemble of ||<x>^k I u|| / ||<x>^k u||
    int ensemble_size = 0;
    double det_bound = 0.0;    // sup over supp gamma of |det D psi|^{-1/2}
    bool guaranteed = false;   // the boundedness hypotheses hold for this (psi, kappa)
};

/// Members alternate between band-limited and x-localised random fields on
/// {gamma(psi^{-1} xi) > 0} intersected with the inner half of the Nyquist box.
BoundednessProbe boundedness_probe(const FrequencyMap& psi, const CutoffSpec& gamma, double kappa,
                                   const GridSpec& grid, int ensemble_size, std::uint64_t seed);

struct EquivalenceCheck {
    double lhs = 0.0;  // || w zeta(|grad a(D)|) e^{ita(D)} phi ||, a = sigma o psi
    double rhs = 0.0;  // || w zeta(|grad sigma(D)|) e^{it sigma(D)} I^{-1} phi ||
    double ratio = 0.0;
    double q_sup = 0.0;  // sup of gamma zeta(|grad a|) / zeta(|grad sigma o psi|)
    bool q_flagged = false;  // q_sup > 1e6 (or unbounded)
};

/// Linear psi only. The smoother in `spec` is evaluated on each side's own
/// symbol. Throws ErrorKind::domain if phi^ is not supported in supp gamma.
EquivalenceCheck equivalence_check(const Symbol& sigma, const FrequencyMap& psi, const CutoffSpec& gamma,
                                   const EstimateSpec& spec, const ComplexField& phi);

struct EquivalenceStudy {
    std::vector<double> ratios;
    double low = 0.0, high = 0.0;
    double band = 0.0;  // max(high, 1 / low)
    double q_sup = 0.0;
    bool q_flagged = false;
};

/// Ensemble of x-localised fields supported where gamma >= 1/2.
EquivalenceStudy equivalence_study(const Symbol& sigma, const FrequencyMap& psi, const CutoffSpec& gamma,
                                   const EstimateSpec& spec, const GridSpec& grid, int ensemble_size,
                                   std::uint64_t seed);

struct RankPair {
    Vec point;  // critical point of a = sigma o psi
    int rank_a = 0;
    int rank_sigma = 0;
};

/// Hessian ranks of a at its critical points and of sigma at their images. With
/// no points given, the critical points of a are searched in [-3, 3]^n.
std::vector<RankPair> rank_invariance_check(const Symbol& sigma, const FrequencyMap& psi,
                                            std::vector<Vec> points = {});

}  // namespace smoothlab
