#pragma once

#include <Eigen/Dense>
#include <functional>

#include "pim/point_cloud.hpp"

namespace pim {

/// Compactly supported kernel profile R together with its tail integral
/// Rbar(r) = \int_r^inf R(s) ds. The default profile is the C^2 polynomial
/// R(r) = (1-r)^4 (4r+1) on [0,1], with the closed-form tail
/// Rbar(r) = (1-r)^5 (1+2r)/3.
struct KernelProfile {
    std::function<double(double)> r;
    std::function<double(double)> rbar;

    static KernelProfile quartic_default();
};

/// Checks the profile assumptions numerically on a grid: nonnegativity and
/// compact support on [0,1], floor delta0 on [0,1/2], and C^2 smoothness via
/// finite-difference continuity. Throws ParameterError on violation.
void audit_profile(const KernelProfile& profile, double delta0);

/// Bandwidth t (squared length), intrinsic dimension k and profile. The pair
/// kernel is R_t(x,y) = C_t R(|x-y|^2 / 4t) with C_t = (4 pi t)^{-k/2};
/// support radius in ambient distance is 2 sqrt(t).
struct KernelSpec {
    double t = 0.0;
    int intrinsic_dim = 2;
    double delta0 = 0.1;
    KernelProfile profile = KernelProfile::quartic_default();

    double normalization() const;
    double support_radius() const;
};

KernelSpec make_kernel(double t, int intrinsic_dim);

double profile_r(const KernelSpec& spec, double r);
double profile_rbar(const KernelSpec& spec, double r);

double eval_rt(const KernelSpec& spec,
               const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y);
double eval_rbart(const KernelSpec& spec,
                  const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y);

struct BandwidthPolicy {
    enum class Kind { balance, fixed };
    Kind kind = Kind::balance;
    double c_b = 8.0;      // balance: t = c_b * h^2
    double t_fixed = 0.0;  // fixed: passthrough

    static BandwidthPolicy balance(double c_b) { return {Kind::balance, c_b, 0.0}; }
    static BandwidthPolicy fixed(double t) { return {Kind::fixed, 0.0, t}; }
};

/// balance scales t with the squared fill distance so the kernel ball keeps a
/// resolution-independent sample population (about 4 pi c_b points on
/// quasi-uniform 2D clouds); fixed passes t through unchanged.
KernelSpec select_bandwidth(const SamplingStats& stats, const BandwidthPolicy& policy,
                            int intrinsic_dim);

} // namespace pim
