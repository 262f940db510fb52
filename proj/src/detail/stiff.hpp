#pragma once

// Stiff time stepping shared by the coefficient solvers: a TR-BDF2 one-step
// method for small dense systems (with step-doubling error control) and the
// same method for semilinear parabolic systems on a 1-D grid, where every
// Newton iteration solves a block-tridiagonal system.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "smallimpact/errors.hpp"
#include "smallimpact/model.hpp"

namespace smallimpact::detail {

template <int K>
using Vec = Eigen::Matrix<double, K, 1>;
template <int K>
using Mat = Eigen::Matrix<double, K, K>;

inline const double kTrGamma = 2.0 - std::sqrt(2.0);

template <int K>
double scaled_norm(const Vec<K>& d, const Vec<K>& v) {
    double m = 0.0;
    for (int k = 0; k < K; ++k) m = std::max(m, std::abs(d[k]) / (1.0 + std::abs(v[k])));
    return m;
}

/// Solves v - ah * f(tau, v) = b by Newton's method. rhs(tau, u, f, J).
template <int K, class Rhs>
bool newton_stage(const Rhs& rhs, double tau, double ah, const Vec<K>& b, Vec<K>& v, double tol, int max_iter) {
    Vec<K> f;
    Mat<K> J;
    for (int it = 0; it < max_iter; ++it) {
        rhs(tau, v, f, J);
        const Vec<K> r = v - ah * f - b;
        const Mat<K> M = Mat<K>::Identity() - ah * J;
        const Vec<K> d = M.partialPivLu().solve(-r);
        v += d;
        if (!v.allFinite()) return false;
        if (scaled_norm<K>(d, v) <= tol) return true;
    }
    return false;
}

/// One TR-BDF2 step of du/dtau = f(tau, u).
template <int K, class Rhs>
bool trbdf2_step(const Rhs& rhs, double tau, double h, const Vec<K>& u, Vec<K>& out, double tol, int max_iter) {
    const double g = kTrGamma;
    Vec<K> f0;
    Mat<K> J0;
    rhs(tau, u, f0, J0);
    const Vec<K> b1 = u + 0.5 * g * h * f0;
    Vec<K> v1 = u + g * h * f0;
    if (!v1.allFinite()) v1 = u;
    if (!newton_stage<K>(rhs, tau + g * h, 0.5 * g * h, b1, v1, tol, max_iter)) return false;
    const double w = (1.0 - g) / (2.0 - g);
    const Vec<K> b2 = (1.0 / (g * (2.0 - g))) * v1 - ((1.0 - g) * (1.0 - g) / (g * (2.0 - g))) * u;
    out = v1;
    return newton_stage<K>(rhs, tau + h, w * h, b2, out, tol, max_iter);
}

/// Integrates from tau0 to tau1 with step doubling; h carries the step size
/// between calls.
template <int K, class Rhs>
void integrate_adaptive(const Rhs& rhs, double tau0, double tau1, Vec<K>& u, double& h, double tol,
                        double newton_tol, int max_newton) {
    double tau = tau0;
    int guard = 0;
    while (tau < tau1) {
        if (++guard > 10'000'000) throw NumericFault("adaptive integrator: step budget exhausted", tau);
        const bool last = tau + h >= tau1 * (1.0 - 1e-15);
        const double hs = last ? tau1 - tau : h;
        Vec<K> big, half, small;
        bool ok = trbdf2_step<K>(rhs, tau, hs, u, big, newton_tol, max_newton) &&
                  trbdf2_step<K>(rhs, tau, 0.5 * hs, u, half, newton_tol, max_newton) &&
                  trbdf2_step<K>(rhs, tau + 0.5 * hs, 0.5 * hs, half, small, newton_tol, max_newton);
        if (!ok) {
            h = 0.25 * hs;
            if (h < 1e-300) throw NumericFault("adaptive integrator: Newton failure with vanishing step", tau);
            continue;
        }
        const double err = scaled_norm<K>((small - big) / 3.0, small);
        if (err <= tol) {
            tau = last ? tau1 : tau + hs;
            u = small;
        }
        const double factor = err > 0.0 ? 0.9 * std::cbrt(tol / err) : 4.0;
        const double hn = hs * std::clamp(factor, 0.2, 4.0);
        if (err <= tol && last) {
            h = std::max(h, hn);
        } else {
            h = hn;
        }
    }
}

/// Node-local coefficients of the reaction term.
struct NodeCoeffs {
    double rho;
    double lambda;
};

/// TR-BDF2 for du/dtau = L(t) u + f(t, chi, u) with
/// L u = mu u_chi + 0.5 sigma^2 u_chichi, t = T - tau. At the grid ends the
/// curvature term is dropped and the drift is discretized one-sidedly.
/// reaction(const NodeCoeffs&, const Vec<K>& u, Vec<K>& f, Mat<K>& J).
template <int K, class Reaction>
class SemilinearStepper {
public:
    using V = Vec<K>;
    using M = Mat<K>;

    SemilinearStepper(const FactorModel& factor, std::vector<double> chi, double T, Reaction reaction, double tol,
                      int max_iter)
        : factor_(factor), chi_(std::move(chi)), T_(T), reaction_(std::move(reaction)), tol_(tol),
          max_iter_(max_iter) {
        const std::size_t n = chi_.size();
        lo_.resize(n);
        di_.resize(n);
        up_.resize(n);
        coeffs_.resize(n);
        f_.resize(n);
        J_.resize(n);
        inv_.resize(n);
        y_.resize(n);
        tmp_.resize(n);
    }

    [[nodiscard]] std::size_t size() const { return chi_.size(); }

    /// One step from tau to tau + h.
    void step(double tau, double h, std::vector<V>& u) {
        const double g = kTrGamma;
        const std::size_t n = size();
        // Stage 1: trapezoid on [tau, tau + g h].
        assemble(T_ - tau);
        apply(u, tmp_);
        std::vector<V> b1(n), v(n);
        for (std::size_t j = 0; j < n; ++j) {
            b1[j] = u[j] + 0.5 * g * h * tmp_[j];
            v[j] = u[j];
        }
        solve_stage(tau + g * h, 0.5 * g * h, b1, v);
        // Stage 2: BDF2 to tau + h.
        const double w = (1.0 - g) / (2.0 - g);
        const double c1 = 1.0 / (g * (2.0 - g));
        const double c0 = (1.0 - g) * (1.0 - g) / (g * (2.0 - g));
        std::vector<V> b2(n);
        for (std::size_t j = 0; j < n; ++j) b2[j] = c1 * v[j] - c0 * u[j];
        solve_stage(tau + h, w * h, b2, v);
        u.swap(v);
    }

    /// Coefficients at time t for node j (valid after the last assemble()).
    [[nodiscard]] const NodeCoeffs& coeffs(std::size_t j) const { return coeffs_[j]; }

private:
    void assemble(double t) {
        const std::size_t n = size();
        for (std::size_t j = 0; j < n; ++j) {
            const double x = chi_[j];
            coeffs_[j] = NodeCoeffs{factor_.f_rho(t, x), factor_.f_lambda(t, x)};
            const double mu = factor_.mu(t, x);
            const double sg = factor_.sigma(t, x);
            if (j == 0) {
                const double dx = chi_[1] - chi_[0];
                lo_[j] = 0.0;
                di_[j] = -mu / dx;
                up_[j] = mu / dx;
            } else if (j + 1 == n) {
                const double dx = chi_[j] - chi_[j - 1];
                lo_[j] = -mu / dx;
                di_[j] = mu / dx;
                up_[j] = 0.0;
            } else {
                const double hm = chi_[j] - chi_[j - 1];
                const double hp = chi_[j + 1] - chi_[j];
                const double d2 = 0.5 * sg * sg;
                // Three-point first and second derivatives on a nonuniform grid.
                const double a1 = -hp / (hm * (hm + hp)), c1 = hm / (hp * (hm + hp)), b1 = -(a1 + c1);
                const double a2 = 2.0 / (hm * (hm + hp)), c2 = 2.0 / (hp * (hm + hp)), b2 = -(a2 + c2);
                lo_[j] = mu * a1 + d2 * a2;
                di_[j] = mu * b1 + d2 * b2;
                up_[j] = mu * c1 + d2 * c2;
            }
        }
    }

    /// out = L u + f(u) with the currently assembled coefficients.
    void apply(const std::vector<V>& u, std::vector<V>& out) {
        const std::size_t n = size();
        for (std::size_t j = 0; j < n; ++j) {
            reaction_(coeffs_[j], u[j], f_[j], J_[j]);
            V lu = di_[j] * u[j];
            if (j > 0) lu += lo_[j] * u[j - 1];
            if (j + 1 < n) lu += up_[j] * u[j + 1];
            out[j] = lu + f_[j];
        }
    }

    /// Solves v - ah (L v + f(v)) = b at time tau (Newton, block Thomas).
    void solve_stage(double tau, double ah, const std::vector<V>& b, std::vector<V>& v) {
        const std::size_t n = size();
        assemble(T_ - tau);
        for (int it = 0; it < max_iter_; ++it) {
            apply(v, tmp_);
            // Forward sweep on J delta = -r.
            for (std::size_t j = 0; j < n; ++j) {
                const V r = v[j] - ah * tmp_[j] - b[j];
                M diag = M::Identity() * (1.0 - ah * di_[j]) - ah * J_[j];
                V rhs = -r;
                if (j > 0) {
                    const double l = -ah * lo_[j];
                    const double uprev = -ah * up_[j - 1];
                    diag -= (l * uprev) * inv_[j - 1];
                    rhs -= l * (inv_[j - 1] * y_[j - 1]);
                }
                inv_[j] = diag.inverse();
                y_[j] = rhs;
            }
            double norm = 0.0;
            V next = V::Zero();
            for (std::size_t jj = n; jj-- > 0;) {
                V d = y_[jj];
                if (jj + 1 < n) d -= (-ah * up_[jj]) * next;
                d = inv_[jj] * d;
                next = d;
                v[jj] += d;
                norm = std::max(norm, scaled_norm<K>(d, v[jj]));
            }
            if (!std::isfinite(norm)) break;
            if (norm <= tol_) return;
        }
        std::ostringstream os;
        os << "semilinear solver: Newton iteration did not converge within " << max_iter_ << " iterations";
        throw NumericFault(os.str(), T_ - tau);
    }

    const FactorModel& factor_;
    std::vector<double> chi_;
    double T_;
    Reaction reaction_;
    double tol_;
    int max_iter_;
    std::vector<double> lo_, di_, up_;
    std::vector<NodeCoeffs> coeffs_;
    std::vector<V> f_;
    std::vector<M> J_;
    std::vector<M> inv_;
    std::vector<V> y_;
    std::vector<V> tmp_;
};

}  // namespace smallimpact::detail
