#pragma once

// Closed-form quantities of the critical semilinear wave problem
//     u_tt - Δu = |u|^p  in R^n x [0, ∞),  u(0) = ε f,  u_t(0) = ε g,
// and the constant bookkeeping of the iteration that bounds its lifespan.
//
// Everything that grows like p^j (C_j, K_j(t), the lifespan bounds) is carried
// in log space; the exp() of such a value is only a convenience and may be inf.

#include <cstdint>

namespace critwave {

/// Shape of the compactly supported initial data. Amplitudes are derived from
/// the requested integrals, so ε stays the only strength dial.
struct ProfileShape {
    int m = 4;              ///< smoothness order of (1 - (r/R)^2)_+^m
    double weight_f = 1.0;  ///< ∫ f dx at ε = 1
    double weight_g = 1.0;  ///< ∫ g dx at ε = 1
    /// Lets the weights go negative; only for negative controls outside the
    /// nonnegative-data hypothesis.
    bool diagnostic_signed = false;
};

struct ModelParams {
    int n = 4;
    double p = 2.0;
    double R = 1.0;
    double epsilon = 1.0;
    ProfileShape profile{};

    /// Throws ParameterError unless n >= 2, p > 1, R > 0, ε >= 0 and the profile is usable.
    /// ε = 0 is accepted (zero data) because the solver must handle it.
    void validate() const;

    /// |γ(p, n)| < 1e-9.
    [[nodiscard]] bool is_critical() const;
};

/// γ(p, n) = 2 + (n+1)p - (n-1)p^2.
double gamma(double p, int n);

/// Positive root of γ(·, n), from the closed form.
double p_crit(int n);

struct OdiExponents {
    double a;  ///< n + 1 - (n-1)p/2
    double q;  ///< n(p - 1)
};

OdiExponents odi_exponents(int n, double p);

/// a_j = 3·4^{j-1} - 1. Exact for j <= 31.
std::int64_t a_seq(int j);

/// S(j) = Σ_{k=1}^{j-1} k / p^k.
double s_partial(int j, double p);

/// S(∞) = p / (p-1)^2.
double s_inf(double p);

/// vol(B^n(0,1)) = π^{n/2} / Γ(n/2 + 1).
double unit_ball_volume(int n);

/// |S^{n-1}| = 2π^{n/2} / Γ(n/2) = n·vol(B^n).
double unit_sphere_area(int n);

/// Threshold on K in the ODI blow-up lemma:
/// K_0 = { 2^{-q/2} a^{-1} sqrt(B/(p+1)) (1 - 2^{-aδ}) }^{-2/(p-1)}.
double k0(double B, double q, double a, double p, double delta);

/// δ default: midpoint of (0, (p-1)/2).
double default_delta(double p);

struct ConstantLedger {
    int n = 0;
    double p = 0.0;
    double R = 0.0;
    double epsilon = 0.0;

    double a = 0.0;
    double q = 0.0;
    double C = 0.0;      ///< frame / first-step constant (empirical input)
    double C0 = 0.0;
    double Cp = 0.0;
    double C1 = 0.0;     ///< includes the ε^{p^2} factor
    double log_C1 = 0.0; ///< log C1, stays finite when C1 underflows
    double D = 0.0;
    double S_inf = 0.0;
    double delta = 0.0;
    double B = 0.0;      ///< vol(B^n)^{1-p}
    double K0 = 0.0;
    double E = 0.0;
};

/// Fills every constant for one problem instance and one value of C.
/// Throws ParameterError for δ outside (0, (p-1)/2), C <= 0, ε <= 0 or p <= 1.
ConstantLedger make_ledger(const ModelParams& params, double C, double delta);

/// log C_j from the closed form
///   log C_j = p^{j-1} (log C0 + log C1 - S(j) log Cp) - log C0.
double log_c_j(int j, const ConstantLedger& L);

/// log C_j from the one-step recursion
///   log C_{j+1} = p log C_j - j log Cp + (p-1) log C0,   log C_1 = log C1.
double log_c_j_recursive(int j, const ConstantLedger& L);

/// log L_j(t) = log(C0 C1 Cp^{-S(j)}) + p/(p-1) · log(½ log t).
double log_l_j(int j, double t, const ConstantLedger& L);

/// log K_j(t) with K_j(t) = C_j / (16^j D) · (½ log t)^{(p^j - 1)/(p - 1)},
/// evaluated through the L_j form. Throws ParameterError for t <= 1.
double log_k_weight(int j, double t, const ConstantLedger& L);

struct LifespanBound {
    double log_T0 = 0.0;     ///< E ε^{-p(p-1)}
    double log_T_upper = 0.0;
    double T0 = 0.0;         ///< exp(log_T0), may be inf
    double T_upper = 0.0;
};

/// T0(ε) = exp(E ε^{-p(p-1)}), T_upper = exp(2 E ε^{-p(p-1)}).
LifespanBound lifespan_bound(const ConstantLedger& L, double epsilon);

struct MEquivalence {
    bool direct;      ///< t - ρ >= M R
    bool rearranged;  ///< (M+1){t - ρ - (M-1)R} >= t - ρ + R
};

MEquivalence m_equiv(double t_minus_rho, double M, double R);

} // namespace critwave
