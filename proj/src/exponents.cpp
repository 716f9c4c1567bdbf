#include "critwave/exponents.hpp"

#include "critwave/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace critwave {

namespace {

void require_dimension(int n) {
    if (n < 2) throw ParameterError("dimension n must be >= 2, got " + std::to_string(n));
}

void require_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw ParameterError("exponent p must be > 1, got " + std::to_string(p));
}

// 2^{n-2} · 3^{(n-1)p/2} · {n - (n-1)p/2}^p, the denominator of C1 without C and ε.
double log_c1_denominator(int n, double p) {
    const double gap = n - (n - 1) * p / 2.0;
    if (!(gap > 0.0)) throw ParameterError("n - (n-1)p/2 must be positive");
    return (n - 2) * std::log(2.0) + (n - 1) * p / 2.0 * std::log(3.0) + p * std::log(gap);
}

} // namespace

void ModelParams::validate() const {
    require_dimension(n);
    require_exponent(p);
    if (!(R > 0.0) || !std::isfinite(R)) throw ParameterError("support radius R must be > 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("amplitude epsilon must be >= 0");
    if (profile.m < 3) throw ParameterError("profile smoothness m must be >= 3");
    if (!profile.diagnostic_signed && (profile.weight_f < 0.0 || profile.weight_g < 0.0))
        throw ParameterError("profile weights must be nonnegative");
    if (profile.weight_f == 0.0 && profile.weight_g == 0.0)
        throw ParameterError("at least one of the profile weights must be positive");
}

bool ModelParams::is_critical() const { return std::abs(critwave::gamma(p, n)) < 1e-9; }

double gamma(double p, int n) {
    require_dimension(n);
    if (!(p >= 1.0)) throw ParameterError("exponent p must be >= 1");
    return 2.0 + (n + 1) * p - (n - 1) * p * p;
}

double p_crit(int n) {
    require_dimension(n);
    const double nn = n;
    return (nn + 1.0 + std::sqrt(nn * nn + 10.0 * nn - 7.0)) / (2.0 * (nn - 1.0));
}

OdiExponents odi_exponents(int n, double p) {
    require_dimension(n);
    if (!(p >= 1.0)) throw ParameterError("exponent p must be >= 1");
    return {n + 1.0 - (n - 1.0) * p / 2.0, n * (p - 1.0)};
}

std::int64_t a_seq(int j) {
    if (j < 1) throw ParameterError("a_j is defined for j >= 1");
    if (j > 31) throw ParameterError("a_j overflows 64-bit integers beyond j = 31");
    return 3 * (std::int64_t{1} << (2 * (j - 1))) - 1;
}

double s_partial(int j, double p) {
    if (j < 1) throw ParameterError("S(j) is defined for j >= 1");
    require_exponent(p);
    double sum = 0.0;
    double inv_pk = 1.0;
    for (int k = 1; k < j; ++k) {
        inv_pk /= p;
        if (inv_pk == 0.0) break;
        sum += k * inv_pk;
    }
    return sum;
}

double s_inf(double p) {
    require_exponent(p);
    return p / ((p - 1.0) * (p - 1.0));
}

double unit_ball_volume(int n) {
    require_dimension(n);
    return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

double default_delta(double p) { return (p - 1.0) / 4.0; }

double k0(double B, double q, double a, double p, double delta) {
    require_exponent(p);
    if (!(B > 0.0)) throw ParameterError("B must be > 0");
    if (!(a > 0.0)) throw ParameterError("a must be > 0");
    if (!(delta > 0.0 && delta < (p - 1.0) / 2.0))
        throw ParameterError("delta must lie in (0, (p-1)/2)");
    const double base = std::pow(2.0, -q / 2.0) / a * std::sqrt(B / (p + 1.0)) *
                        (1.0 - std::pow(2.0, -a * delta));
    return std::pow(base, -2.0 / (p - 1.0));
}

ConstantLedger make_ledger(const ModelParams& params, double C, double delta) {
    const int n = params.n;
    const double p = params.p;
    require_dimension(n);
    if (p == 1.0) throw ParameterError("degenerate exponent p = 1");
    require_exponent(p);
    if (!(params.R > 0.0)) throw ParameterError("support radius R must be > 0");
    if (!(params.epsilon > 0.0)) throw ParameterError("ledger needs epsilon > 0");
    if (!(C > 0.0) || !std::isfinite(C)) throw ParameterError("constant C must be > 0");
    if (!(delta > 0.0 && delta < (p - 1.0) / 2.0))
        throw ParameterError("delta must lie in (0, (p-1)/2), got " + std::to_string(delta));

    ConstantLedger L;
    L.n = n;
    L.p = p;
    L.R = params.R;
    L.epsilon = params.epsilon;
    L.C = C;
    L.delta = delta;

    const auto [a, q] = odi_exponents(n, p);
    if (!(a > 0.0)) throw ParameterError("ODI growth power a = n+1-(n-1)p/2 must be positive");
    L.a = a;
    L.q = q;

    const double ln2 = std::log(2.0);
    const double ln3 = std::log(3.0);
    const double log_C = std::log(C);

    const double log_c0 = (std::log((p - 1.0) * C) -
                           (n - 1 + (n + 1) * p / 2.0) * ln2 - (n * p - 1.0) * ln3 - std::log(p)) /
                          (p - 1.0);
    L.C0 = std::exp(log_c0);

    const double log_cp = (n + 1) * p * ln2 + std::log(p);
    L.Cp = std::exp(log_cp);

    const double log_den = log_c1_denominator(n, p);
    L.log_C1 = (p + 1.0) * log_C + p * p * std::log(params.epsilon) - log_den;
    L.C1 = std::exp(L.log_C1);

    L.D = 9.0 * std::pow(2.0, 3.0 * n - 2.0 - 3.0 * (n - 1) * p / 2.0);
    L.S_inf = s_inf(p);
    L.B = std::pow(unit_ball_volume(n), 1.0 - p);
    L.K0 = k0(L.B, q, a, p, delta);

    const double log_inner = log_den + 1.0 + L.S_inf * log_cp - log_c0 - (p + 1.0) * log_C;
    L.E = 2.0 * std::exp((p - 1.0) / p * log_inner);
    return L;
}

double log_c_j(int j, const ConstantLedger& L) {
    if (j < 1) throw ParameterError("C_j is defined for j >= 1");
    const double p = L.p;
    const double log_c0 = std::log(L.C0);
    const double bracket = log_c0 + L.log_C1 - s_partial(j, p) * std::log(L.Cp);
    return std::pow(p, j - 1) * bracket - log_c0;
}

double log_c_j_recursive(int j, const ConstantLedger& L) {
    if (j < 1) throw ParameterError("C_j is defined for j >= 1");
    const double p = L.p;
    const double log_c0 = std::log(L.C0);
    const double log_cp = std::log(L.Cp);
    double value = L.log_C1;
    for (int k = 1; k < j; ++k) value = p * value - k * log_cp + (p - 1.0) * log_c0;
    return value;
}

double log_l_j(int j, double t, const ConstantLedger& L) {
    if (!(t > 1.0)) throw ParameterError("L_j(t) needs t > 1");
    const double p = L.p;
    return std::log(L.C0) + L.log_C1 - s_partial(j, p) * std::log(L.Cp) +
           p / (p - 1.0) * std::log(0.5 * std::log(t));
}

double log_k_weight(int j, double t, const ConstantLedger& L) {
    if (j < 1) throw ParameterError("K_j is defined for j >= 1");
    if (!(t > 1.0)) throw ParameterError("K_j(t) needs t > 1 (log log t undefined otherwise)");
    const double p = L.p;
    return std::pow(p, j - 1) * log_l_j(j, t, L) - j * std::log(16.0) - std::log(L.C0 * L.D) -
           std::log(std::log(std::sqrt(t))) / (p - 1.0);
}

LifespanBound lifespan_bound(const ConstantLedger& L, double epsilon) {
    if (!(L.E > 0.0)) throw ParameterError("ledger E must be > 0");
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    LifespanBound b;
    b.log_T0 = L.E * std::pow(epsilon, -L.p * (L.p - 1.0));
    b.log_T_upper = 2.0 * b.log_T0;
    b.T0 = std::exp(b.log_T0);
    b.T_upper = std::exp(b.log_T_upper);
    return b;
}

MEquivalence m_equiv(double t_minus_rho, double M, double R) {
    return {t_minus_rho >= M * R, (M + 1.0) * (t_minus_rho - (M - 1.0) * R) >= t_minus_rho + R};
}

} // namespace critwave
