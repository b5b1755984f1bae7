#include "pim/kernel.hpp"

#include <cmath>
#include <numbers>

#include "pim/errors.hpp"

namespace pim {

namespace {

double quartic_r(double r) {
    if (r < 0.0 || r > 1.0) return 0.0;
    const double s = 1.0 - r;
    const double s2 = s * s;
    return s2 * s2 * (4.0 * r + 1.0);
}

double quartic_rbar(double r) {
    if (r < 0.0 || r > 1.0) return 0.0;
    const double s = 1.0 - r;
    const double s2 = s * s;
    return s2 * s2 * s * (1.0 + 2.0 * r) / 3.0;
}

} // namespace

KernelProfile KernelProfile::quartic_default() {
    return {quartic_r, quartic_rbar};
}

void audit_profile(const KernelProfile& profile, double delta0) {
    if (!profile.r || !profile.rbar) {
        throw ParameterError("audit_profile: missing profile callables");
    }
    const int grid = 2000;
    const double dr = 2.0 / grid;
    for (int i = 0; i <= grid; ++i) {
        const double r = i * dr;
        const double v = profile.r(r);
        if (!(v >= 0.0)) {
            throw ParameterError("profile violates R >= 0 at r=" + std::to_string(r));
        }
        if (r > 1.0 && v != 0.0) {
            throw ParameterError("profile violates compact support at r=" + std::to_string(r));
        }
        if (r <= 0.5 && v < delta0) {
            throw ParameterError("profile violates floor delta0 on [0,1/2] at r=" +
                                 std::to_string(r));
        }
    }
    // C^2 proxy: second finite differences must vary continuously on the grid
    const double fd = 1e-4;
    double prev_d2 = 0.0;
    bool have_prev = false;
    for (int i = 1; i < grid; ++i) {
        const double r = i * dr;
        const double d2 =
            (profile.r(r + fd) - 2.0 * profile.r(r) + profile.r(r - fd)) / (fd * fd);
        if (have_prev && std::abs(d2 - prev_d2) > 1e3 * (1.0 + std::abs(prev_d2)) * dr) {
            throw ParameterError("profile second derivative jumps near r=" + std::to_string(r));
        }
        prev_d2 = d2;
        have_prev = true;
    }
    // Rbar must integrate R: spot-check the derivative relation
    for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double lhs = (profile.rbar(r + fd) - profile.rbar(r - fd)) / (2.0 * fd);
        if (std::abs(lhs + profile.r(r)) > 1e-4 * (1.0 + std::abs(profile.r(r)))) {
            throw ParameterError("profile tail integral inconsistent with R at r=" +
                                 std::to_string(r));
        }
    }
}

double KernelSpec::normalization() const {
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * intrinsic_dim);
}

double KernelSpec::support_radius() const {
    return 2.0 * std::sqrt(t);
}

KernelSpec make_kernel(double t, int intrinsic_dim) {
    if (!(t > 0.0)) throw ParameterError("kernel bandwidth t must be positive");
    if (intrinsic_dim < 1) throw ParameterError("intrinsic dimension must be >= 1");
    KernelSpec spec;
    spec.t = t;
    spec.intrinsic_dim = intrinsic_dim;
    return spec;
}

double profile_r(const KernelSpec& spec, double r) {
    return spec.profile.r(r);
}

double profile_rbar(const KernelSpec& spec, double r) {
    return spec.profile.rbar(r);
}

double eval_rt(const KernelSpec& spec,
               const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (!(spec.t > 0.0)) throw ParameterError("eval_rt: t must be positive");
    return spec.normalization() * spec.profile.r((x - y).squaredNorm() / (4.0 * spec.t));
}

double eval_rbart(const KernelSpec& spec,
                  const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (!(spec.t > 0.0)) throw ParameterError("eval_rbart: t must be positive");
    return spec.normalization() * spec.profile.rbar((x - y).squaredNorm() / (4.0 * spec.t));
}

KernelSpec select_bandwidth(const SamplingStats& stats, const BandwidthPolicy& policy,
                            int intrinsic_dim) {
    if (policy.kind == BandwidthPolicy::Kind::fixed) {
        return make_kernel(policy.t_fixed, intrinsic_dim);
    }
    if (!(stats.fill_distance > 0.0)) {
        throw ParameterError("select_bandwidth: fill distance must be positive");
    }
    if (!(policy.c_b > 0.0)) {
        throw ParameterError("select_bandwidth: c_b must be positive");
    }
    return make_kernel(policy.c_b * stats.fill_distance * stats.fill_distance, intrinsic_dim);
}

} // namespace pim
