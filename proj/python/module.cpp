#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mildns/calculus.hpp"
#include "mildns/duhamel.hpp"
#include "mildns/picard.hpp"
#include "mildns/reference.hpp"
#include "mildns/snapshot.hpp"
#include "mildns/spaces.hpp"

namespace py = pybind11;
using namespace mildns;

namespace {

struct PyGrid {
    GridPtr ptr;
};

py::array_t<double> field_to_array(const Field& f) {
    const int d = f.grid()->dim();
    const int n = f.grid()->samples_per_axis();
    std::vector<py::ssize_t> shape{f.channels()};
    for (int a = 0; a < d; ++a) shape.push_back(n);
    py::array_t<double> out(shape);
    double* dst = out.mutable_data();
    const std::size_t np = f.points();
    for (int c = 0; c < f.channels(); ++c) {
        auto p = f.physical(c);
        std::copy(p.begin(), p.end(), dst + c * np);
    }
    return out;
}

Field field_from_array(const PyGrid& grid, py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    const int d = grid.ptr->dim();
    const int n = grid.ptr->samples_per_axis();
    int channels = 1;
    if (arr.ndim() == d + 1) {
        channels = static_cast<int>(arr.shape(0));
    } else if (arr.ndim() != d) {
        throw std::invalid_argument("array must have d or d+1 dimensions");
    }
    for (int a = 0; a < d; ++a)
        if (arr.shape(arr.ndim() - d + a) != n) throw std::invalid_argument("array axes must match grid n");
    std::vector<double> samples(arr.data(), arr.data() + arr.size());
    return Field::from_physical(grid.ptr, channels, std::move(samples));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pseudo-spectral mild-solution toolkit for the Navier-Stokes equations";

    py::class_<PyGrid>(m, "Grid")
        .def_property_readonly("d", [](const PyGrid& g) { return g.ptr->dim(); })
        .def_property_readonly("n", [](const PyGrid& g) { return g.ptr->samples_per_axis(); })
        .def_property_readonly("L", [](const PyGrid& g) { return g.ptr->box_length(); })
        .def_property_readonly("cell_volume", [](const PyGrid& g) { return g.ptr->cell_volume(); })
        .def("__repr__", [](const PyGrid& g) {
            return "Grid(d=" + std::to_string(g.ptr->dim()) + ", n=" + std::to_string(g.ptr->samples_per_axis()) +
                   ", L=" + std::to_string(g.ptr->box_length()) + ")";
        });

    m.def("make_grid", [](int d, int n, double L) { return PyGrid{make_grid(d, n, L)}; },
          py::arg("d"), py::arg("n"), py::arg("L"));

    py::class_<Field>(m, "Field")
        .def_property_readonly("channels", &Field::channels)
        .def_property_readonly("grid", [](const Field& f) { return PyGrid{f.grid()}; })
        .def("to_array", &field_to_array)
        .def("max_abs", &Field::max_abs)
        .def("mean", &Field::mean, py::arg("channel") = 0)
        .def("projected_zero_mean", &Field::projected_zero_mean)
        .def("__mul__", [](const Field& f, double c) { return f * c; })
        .def("__rmul__", [](const Field& f, double c) { return f * c; })
        .def("__add__", [](const Field& a, const Field& b) { return a + b; })
        .def("__sub__", [](const Field& a, const Field& b) { return a - b; });

    m.def("field_from_array", &field_from_array, py::arg("grid"), py::arg("array"));
    m.def("transform_roundtrip_check", &transform_roundtrip_check);
    m.def("relative_divergence", &relative_divergence);
    m.def("dealias", &dealias);
    m.def("random_band_limited",
          [](const PyGrid& g, int channels, int band, std::uint64_t seed) {
              return random_band_limited(g.ptr, channels, band, seed);
          },
          py::arg("grid"), py::arg("channels") = 1, py::arg("band") = 8, py::arg("seed") = 1);
    m.def("random_divergence_free",
          [](const PyGrid& g, int band, std::uint64_t seed) {
              Field f = leray_project(random_band_limited(g.ptr, g.ptr->dim(), band, seed).projected_zero_mean());
              const double m = f.max_abs();
              return m > 0.0 ? f * (1.0 / m) : f;
          },
          py::arg("grid"), py::arg("band") = 8, py::arg("seed") = 1);

    m.def("fractional_laplacian", &fractional_laplacian, py::arg("field"), py::arg("s"));
    m.def("riesz_transform", &riesz_transform, py::arg("field"), py::arg("axis"));
    m.def("leray_project", &leray_project, py::arg("field"));
    m.def("heat_evolve", &heat_evolve, py::arg("field"), py::arg("t"));
    m.def("oseen_apply", &oseen_apply, py::arg("tensor"), py::arg("t"), py::arg("s"));

    py::class_<SpaceParams>(m, "SpaceParams")
        .def_readonly("d", &SpaceParams::d)
        .def_readonly("p", &SpaceParams::p)
        .def_readonly("s", &SpaceParams::s)
        .def_readonly("q", &SpaceParams::q)
        .def_readonly("q_tilde", &SpaceParams::q_tilde)
        .def_readonly("alpha", &SpaceParams::alpha)
        .def_readonly("critical", &SpaceParams::critical)
        .def("horizon_exponent", &SpaceParams::horizon_exponent);
    m.def("admissible_params", &admissible_params, py::arg("d"), py::arg("p"), py::arg("s"),
          py::arg("q_tilde"));
    m.def("validate_params", &validate_params);

    m.def("lebesgue_norm", &lebesgue_norm, py::arg("field"), py::arg("p"));
    m.def("weak_lebesgue_norm", &weak_lebesgue_norm, py::arg("field"), py::arg("p"));
    m.def("sobolev_norm", &sobolev_norm, py::arg("field"), py::arg("s"), py::arg("p"));
    m.def("triebel_norm_heat",
          [](const Field& f, double s, double q) { return triebel_norm_heat(f, s, q).value; },
          py::arg("field"), py::arg("s"), py::arg("q"));
    m.def("smallness_lhs",
          [](const Field& u0, const SpaceParams& params, double T, int variant) {
              return smallness_lhs(u0, params, T, static_cast<SmallnessVariant>(variant)).value;
          },
          py::arg("u0"), py::arg("params"), py::arg("T"), py::arg("variant") = 1);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("times", [](const Trajectory& t) { return t.times(); })
        .def("__len__", &Trajectory::size)
        .def("field", [](const Trajectory& t, std::size_t i) { return t.field(i); });
    m.def("heat_trajectory", &heat_trajectory, py::arg("u0"), py::arg("times"));
    m.def("g_norm", [](const Trajectory& t, const SpaceParams& p) { return g_norm(t, p).value; });
    m.def("h_norm", [](const Trajectory& t, double s, double p) { return h_norm(t, s, p).value; });

    py::class_<DuhamelScheme>(m, "DuhamelScheme")
        .def_readonly("times", &DuhamelScheme::times)
        .def_static("standard", &DuhamelScheme::standard, py::arg("T"), py::arg("geometric_nodes") = 16,
                    py::arg("uniform_nodes") = 28, py::arg("t0_frac") = 1e-4, py::arg("split_frac") = 0.125)
        .def_static("aligned", &DuhamelScheme::aligned, py::arg("T"), py::arg("dt"),
                    py::arg("uniform_nodes") = 28);
    m.def("bilinear_apply", &bilinear_apply, py::arg("u"), py::arg("v"), py::arg("scheme"));
    m.def("beta_time_integral", &beta_time_integral, py::arg("gamma"), py::arg("theta"), py::arg("t"));

    py::class_<IterationReport>(m, "IterationReport")
        .def_readonly("converged", &IterationReport::converged)
        .def_readonly("diverged", &IterationReport::diverged)
        .def_readonly("iterations", &IterationReport::iterations)
        .def_readonly("final_residual", &IterationReport::final_residual)
        .def_readonly("initial_g_norm", &IterationReport::initial_g_norm)
        .def_readonly("final_g_norm", &IterationReport::final_g_norm)
        .def("to_json", &IterationReport::to_json);
    py::class_<MildSolution>(m, "MildSolution")
        .def_readonly("trajectory", &MildSolution::trajectory)
        .def_readonly("params", &MildSolution::params)
        .def_readonly("report", &MildSolution::report);
    m.def("picard_solve",
          [](const Field& u0, const SpaceParams& params, const DuhamelScheme& scheme, double tol,
             int max_iter) {
              PicardOptions opts;
              opts.tol = tol;
              opts.max_iter = max_iter;
              return picard_solve(u0, params, scheme, opts);
          },
          py::arg("u0"), py::arg("params"), py::arg("scheme"), py::arg("tol") = 1e-10,
          py::arg("max_iter") = 60);
    m.def("residual", &residual, py::arg("u"), py::arg("u0"), py::arg("scheme"));

    py::class_<ReferenceRun>(m, "ReferenceRun")
        .def_readonly("trajectory", &ReferenceRun::trajectory)
        .def_readonly("dt", &ReferenceRun::dt)
        .def_readonly("method", &ReferenceRun::method)
        .def_readonly("energy_series", &ReferenceRun::energy_series);
    m.def("rk4_solve", &rk4_solve, py::arg("u0"), py::arg("T"), py::arg("dt"),
          py::arg("record_times") = std::vector<double>{}, py::arg("disable_nonlinearity") = false);
    m.def("taylor_green", [](const PyGrid& g, double amplitude) { return taylor_green(g.ptr, amplitude); },
          py::arg("grid"), py::arg("amplitude") = 1.0);
    m.def("compare", &compare, py::arg("mild"), py::arg("reference"));

    m.def("write_snapshot", &write_snapshot, py::arg("path"), py::arg("field"));
    m.def("read_snapshot", &read_snapshot, py::arg("path"));
}
