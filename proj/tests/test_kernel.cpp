#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pim/errors.hpp"
#include "pim/kernel.hpp"

using namespace pim;

namespace {

constexpr double kPi = std::numbers::pi;

// adaptive Simpson quadrature, used as an independent oracle for the tail
// integral of the profile
double simpson(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double whole, double tol, int depth) {
    const double c = 0.5 * (a + b);
    const double left = simpson(f, a, c);
    const double right = simpson(f, c, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_quad(f, a, c, left, 0.5 * tol, depth - 1) +
           adaptive_quad(f, c, b, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    return adaptive_quad(f, a, b, simpson(f, a, b), 1e-14, 40);
}

Eigen::Vector2d vec2(double x, double y) { return {x, y}; }

} // namespace

TEST_CASE("default profile point values") {
    const KernelSpec spec = make_kernel(0.01, 2);
    CHECK(profile_r(spec, 0.0) == 1.0);
    CHECK(profile_r(spec, 2.0) == 0.0);
    CHECK(profile_r(spec, 0.5) == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK(profile_r(spec, 0.5) >= spec.delta0);
}

TEST_CASE("tail integral against quadrature oracle") {
    const KernelSpec spec = make_kernel(0.01, 2);
    auto r = [&](double s) { return profile_r(spec, s); };
    CHECK(profile_rbar(spec, 1.0) == 0.0);
    CHECK(std::abs(profile_rbar(spec, 0.0) - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(profile_rbar(spec, 0.0) - integrate(r, 0.0, 1.0)) < 1e-12);
    CHECK(std::abs(profile_rbar(spec, 0.5) - integrate(r, 0.5, 1.0)) < 1e-10);
    CHECK(std::abs(profile_rbar(spec, 0.25) - integrate(r, 0.25, 1.0)) < 1e-10);
}

TEST_CASE("tail integral is nonincreasing and differentiates back to R") {
    const KernelSpec spec = make_kernel(0.01, 2);
    double prev = profile_rbar(spec, 0.0);
    for (int i = 1; i <= 200; ++i) {
        const double r = 1.2 * i / 200.0;
        const double cur = profile_rbar(spec, r);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
    const double fd = 1e-6;
    for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double d = (profile_rbar(spec, r + fd) - profile_rbar(spec, r - fd)) / (2.0 * fd);
        CHECK(std::abs(d + profile_r(spec, r)) < 1e-6);
    }
}

TEST_CASE("pair kernel normalization identity") {
    // k=2, t=1/(4 pi): C_t = (4 pi t)^{-1} = 1, so R_t(x,x) = R(0) = 1
    const KernelSpec spec = make_kernel(1.0 / (4.0 * kPi), 2);
    const Eigen::Vector2d x = vec2(0.3, -0.2);
    CHECK(eval_rt(spec, x, x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pair kernel support radius is 2 sqrt(t), bit exact") {
    const KernelSpec spec = make_kernel(0.04, 2);
    const double s = std::sqrt(spec.t);
    CHECK(spec.support_radius() == 2.0 * s);
    CHECK(eval_rt(spec, vec2(0.0, 0.0), vec2(3.0 * s, 0.0)) == 0.0);
    CHECK(eval_rt(spec, vec2(0.0, 0.0), vec2(2.0 * s + 1e-12, 0.0)) == 0.0);
    CHECK(eval_rbart(spec, vec2(0.0, 0.0), vec2(3.0 * s, 0.0)) == 0.0);
    CHECK(eval_rt(spec, vec2(0.0, 0.0), vec2(1.9 * s, 0.0)) > 0.0);
}

TEST_CASE("pair kernel direct arithmetic") {
    // k=2, t=0.01, |x-y|=0.1: argument is 0.01/0.04 = 0.25
    const KernelSpec spec = make_kernel(0.01, 2);
    const double expected = 1.0 / (4.0 * kPi * 0.01) * profile_r(spec, 0.25);
    CHECK(eval_rt(spec, vec2(0.0, 0.0), vec2(0.1, 0.0)) ==
          doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("pair kernel symmetry, exact") {
    const KernelSpec spec = make_kernel(0.02, 2);
    std::uint64_t s = 12345;
    auto next = [&s]() {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    };
    for (int i = 0; i < 50; ++i) {
        const Eigen::Vector2d x = vec2(next(), next());
        const Eigen::Vector2d y = vec2(next(), next());
        CHECK(eval_rt(spec, x, y) == eval_rt(spec, y, x));
        CHECK(eval_rbart(spec, x, y) == eval_rbart(spec, y, x));
    }
}

TEST_CASE("bad bandwidth rejected") {
    CHECK_THROWS_AS(make_kernel(0.0, 2), ParameterError);
    CHECK_THROWS_AS(make_kernel(-1.0, 2), ParameterError);
    CHECK_THROWS_AS(make_kernel(0.01, 0), ParameterError);
    KernelSpec spec;
    spec.t = 0.0;
    CHECK_THROWS_AS(eval_rt(spec, vec2(0, 0), vec2(1, 0)), ParameterError);
}

TEST_CASE("profile audit accepts the default and rejects violations") {
    CHECK_NOTHROW(audit_profile(KernelProfile::quartic_default(), 0.1));

    KernelProfile no_floor = KernelProfile::quartic_default();
    no_floor.r = [](double r) { return r <= 1.0 ? (1.0 - r) * (1.0 - r) * 0.05 : 0.0; };
    CHECK_THROWS_AS(audit_profile(no_floor, 0.1), ParameterError);

    KernelProfile wide = KernelProfile::quartic_default();
    wide.r = [](double) { return 1.0; };  // no compact support
    CHECK_THROWS_AS(audit_profile(wide, 0.1), ParameterError);

    KernelProfile bad_tail = KernelProfile::quartic_default();
    bad_tail.rbar = [](double) { return 0.25; };  // inconsistent with R
    CHECK_THROWS_AS(audit_profile(bad_tail, 0.1), ParameterError);
}

TEST_CASE("bandwidth selection") {
    SamplingStats stats;
    stats.fill_distance = 0.04;
    stats.min_spacing = 0.02;

    SUBCASE("fixed policy passes through") {
        const KernelSpec spec = select_bandwidth(stats, BandwidthPolicy::fixed(0.01), 2);
        CHECK(spec.t == 0.01);
    }
    SUBCASE("balance policy scales with squared fill distance") {
        const KernelSpec spec = select_bandwidth(stats, BandwidthPolicy::balance(8.0), 2);
        CHECK(spec.t == doctest::Approx(8.0 * 0.04 * 0.04).epsilon(1e-15));

        SamplingStats half = stats;
        half.fill_distance = 0.02;
        const KernelSpec spec2 = select_bandwidth(half, BandwidthPolicy::balance(8.0), 2);
        CHECK(spec2.t == doctest::Approx(0.25 * spec.t).epsilon(1e-15));
    }
    SUBCASE("invalid inputs rejected") {
        SamplingStats bad;
        bad.fill_distance = 0.0;
        CHECK_THROWS_AS(select_bandwidth(bad, BandwidthPolicy::balance(8.0), 2),
                        ParameterError);
        CHECK_THROWS_AS(select_bandwidth(stats, BandwidthPolicy::balance(0.0), 2),
                        ParameterError);
    }
}
