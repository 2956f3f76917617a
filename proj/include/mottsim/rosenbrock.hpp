#pragma once

// Four-stage-order L-stable Rosenbrock step (RODAS4 family, six stages,
// embedded third-order error estimate, third-order continuous extension).

#include <Eigen/Core>
#include <Eigen/LU>

namespace mottsim::rodas {

struct Coefficients {
    static constexpr double gamma = 0.25;
    static constexpr double d1 = 0.25, d2 = -0.1043, d3 = 0.1035, d4 = -0.3620000000000023e-01;
    static constexpr double c2 = 0.386, c3 = 0.21, c4 = 0.63;

    static constexpr double a21 = 0.1544000000000000e+01;
    static constexpr double a31 = 0.9466785280815826e+00, a32 = 0.2557011698983284e+00;
    static constexpr double a41 = 0.3314825187068521e+01, a42 = 0.2896124015972201e+01, a43 = 0.9986419139977817e+00;
    static constexpr double a51 = 0.1221224509226641e+01, a52 = 0.6019134481288629e+01, a53 = 0.1253708332932087e+02,
                            a54 = -0.6878860361058950e+00;

    static constexpr double c21 = -0.5668800000000000e+01;
    static constexpr double c31 = -0.2430093356833875e+01, c32 = -0.2063599157091915e+00;
    static constexpr double c41 = -0.1073529058151375e+00, c42 = -0.9594562251023355e+01, c43 = -0.2047028614809616e+02;
    static constexpr double c51 = 0.7496443313967647e+01, c52 = -0.1024680431464352e+02, c53 = -0.3399990352819905e+02,
                            c54 = 0.1170890893206160e+02;
    static constexpr double c61 = 0.8083246795921522e+01, c62 = -0.7981132988064893e+01, c63 = -0.3152159432874371e+02,
                            c64 = 0.1631930543123136e+02, c65 = -0.6058818238834054e+01;

    static constexpr double d21 = 0.1012623508344586e+02, d22 = -0.7487995877610167e+01, d23 = -0.3480091861555747e+02,
                            d24 = -0.7992771707568823e+01, d25 = 0.1025137723295662e+01;
    static constexpr double d31 = -0.6762803392801253e+00, d32 = 0.6087714651680015e+01, d33 = 0.1643084320892478e+02,
                            d34 = 0.2476722511418386e+02, d35 = -0.6594389125716872e+01;
};

template <int N>
struct StepResult {
    Eigen::Matrix<double, N, 1> x_new;
    Eigen::Matrix<double, N, 1> error;
    Eigen::Matrix<double, N, 1> cont3;
    Eigen::Matrix<double, N, 1> cont4;
};

/// One step of size h from (t, x). `f(tau, x, at_end)` evaluates the
/// right-hand side; `at_end` marks evaluations at t + h, where a stimulus
/// discontinuity must be taken as the left limit. `dxdt` = f(t, x),
/// `dfdt` = partial time derivative at t, `jac` = df/dx at (t, x).
template <int N, class Rhs>
StepResult<N> step(Rhs&& f, double t, const Eigen::Matrix<double, N, 1>& x, const Eigen::Matrix<double, N, 1>& dxdt,
                   const Eigen::Matrix<double, N, 1>& dfdt, const Eigen::Matrix<double, N, N>& jac, double h) {
    using C = Coefficients;
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;
    const Mat w = Mat::Identity() / (C::gamma * h) - jac;
    const Eigen::PartialPivLU<Mat> lu(w);
    const double ih = 1.0 / h;

    const Vec g1 = lu.solve(dxdt + h * C::d1 * dfdt);
    Vec xt = x + C::a21 * g1;
    const Vec g2 = lu.solve(f(t + C::c2 * h, xt, false) + h * C::d2 * dfdt + C::c21 * ih * g1);
    xt = x + C::a31 * g1 + C::a32 * g2;
    const Vec g3 = lu.solve(f(t + C::c3 * h, xt, false) + h * C::d3 * dfdt + ih * (C::c31 * g1 + C::c32 * g2));
    xt = x + C::a41 * g1 + C::a42 * g2 + C::a43 * g3;
    const Vec g4 = lu.solve(f(t + C::c4 * h, xt, false) + h * C::d4 * dfdt +
                            ih * (C::c41 * g1 + C::c42 * g2 + C::c43 * g3));
    xt = x + C::a51 * g1 + C::a52 * g2 + C::a53 * g3 + C::a54 * g4;
    const Vec g5 = lu.solve(f(t + h, xt, true) + ih * (C::c51 * g1 + C::c52 * g2 + C::c53 * g3 + C::c54 * g4));
    xt += g5;
    const Vec g6 = lu.solve(f(t + h, xt, true) +
                            ih * (C::c61 * g1 + C::c62 * g2 + C::c63 * g3 + C::c64 * g4 + C::c65 * g5));

    StepResult<N> r;
    r.x_new = xt + g6;
    r.error = g6;
    r.cont3 = C::d21 * g1 + C::d22 * g2 + C::d23 * g3 + C::d24 * g4 + C::d25 * g5;
    r.cont4 = C::d31 * g1 + C::d32 * g2 + C::d33 * g3 + C::d34 * g4 + C::d35 * g5;
    return r;
}

/// Continuous extension at fraction theta of the step.
template <int N>
Eigen::Matrix<double, N, 1> interpolate(const Eigen::Matrix<double, N, 1>& x_old, const StepResult<N>& r,
                                        double theta) {
    const double th1 = 1.0 - theta;
    return x_old * th1 + theta * (r.x_new + th1 * (r.cont3 + theta * r.cont4));
}

}  // namespace mottsim::rodas
