#pragma once

#include <string>
#include <vector>

#include "mildns/grid.hpp"

namespace mildns {

struct ReferenceRun {
    Trajectory trajectory;
    double dt = 0.0;
    std::string method = "integrating-factor-rk4";
    std::vector<std::pair<double, double>> energy_series;  // (t, kinetic energy) per step
};

// Integrating-factor RK4 on d_t uhat = -|k|^2 uhat - P(ik . (u tensor u)hat)
// with 2/3 dealiasing; the viscous factor is exact, only the nonlinear term
// is RK4-integrated. record_times (default: every ~steps/64 plus endpoints)
// must land on the step lattice. CFL guard dt * max|u| * max|k| <= 0.5.
ReferenceRun rk4_solve(const Field& u0, double T, double dt, std::vector<double> record_times = {},
                       bool disable_nonlinearity = false);

// Classic vortex datum: divergence-free to machine precision, zero mean.
// d = 2: A (sin kx cos ky, -cos kx sin ky); d = 3: the standard vortex with
// a zero third component. k = 2 pi / L.
Field taylor_green(const GridPtr& grid, double amplitude);

// max_n ||u_mild(t_n) - u_ref(t_n)||_2 / ||u_ref(t_n)||_2 over the mild
// trajectory's nodes, which must all appear in the reference run (no
// interpolation; nodes with ||u_ref||_2 < 1e-14 are skipped).
double compare(const Trajectory& mild, const ReferenceRun& ref);

}  // namespace mildns
