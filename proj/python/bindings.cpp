#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "wkam/action.hpp"
#include "wkam/characteristics.hpp"
#include "wkam/commands.hpp"
#include "wkam/fdoracle.hpp"
#include "wkam/legendre.hpp"
#include "wkam/parallel.hpp"
#include "wkam/semigroup.hpp"

namespace py = pybind11;
using namespace wkam;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> a(py::ssize_t(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::array_t<double> field_array(const GridField& f) {
  auto a = to_array(f.values());
  if (f.grid().dim() == 2) {
    const auto n = py::ssize_t(f.grid().n());
    a = a.reshape({n, n});
  }
  return a;
}

py::array_t<double> slab_array(const SpaceTimeField& f) {
  auto a = to_array(f.data());
  const auto s = py::ssize_t(f.n_slices());
  const auto n = py::ssize_t(f.grid().n());
  if (f.grid().dim() == 1) return a.reshape({s, n});
  return a.reshape({s, n, n});
}

GridField from_array(const Grid& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (std::size_t(a.size()) != g.size()) {
    throw py::value_error("expected " + std::to_string(g.size()) + " values");
  }
  return GridField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

TrigPotential potential_from(const std::vector<std::tuple<int, int, double>>& modes) {
  std::vector<CosineMode> m;
  for (const auto& [k1, k2, a] : modes) m.push_back({{k1, k2}, a});
  return TrigPotential(m);
}

Discretization make_disc(double dt, double v_max, const std::string& quadrature) {
  Discretization d;
  d.dt = dt;
  d.v_max = v_max;
  d.quadrature = quadrature_from_string(quadrature);
  return d;
}

SemigroupOptions make_opts(double dt, double v_max, const std::string& quadrature, double tol,
                           int max_iter) {
  SemigroupOptions o;
  o.disc = make_disc(dt, v_max, quadrature);
  o.tol = tol;
  o.max_iter = max_iter;
  return o;
}

py::dict report_dict(const FixedPointReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["gaps"] = r.gaps;
  d["bounds"] = r.bounds;
  d["residual"] = r.residual();
  d["bound_respected"] = r.bound_respected();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "weak KAM toolkit core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  py::class_<HamiltonianModel>(m, "Model")
      .def_static(
          "mechanical",
          [](int dim, const std::vector<std::tuple<int, int, double>>& v, double shift) {
            auto h = HamiltonianModel::mechanical(dim, potential_from(v));
            h.shift = shift;
            return h;
          },
          py::arg("dim") = 1, py::arg("potential") = std::vector<std::tuple<int, int, double>>{},
          py::arg("shift") = 0.0)
      .def_static(
          "discounted",
          [](int dim, double lambda, const std::vector<std::tuple<int, int, double>>& v,
             double shift) {
            auto h = HamiltonianModel::discounted(dim, lambda, potential_from(v));
            h.shift = shift;
            return h;
          },
          py::arg("dim") = 1, py::arg("lam") = 1.0,
          py::arg("potential") = std::vector<std::tuple<int, int, double>>{},
          py::arg("shift") = 0.0)
      .def_static(
          "nonlinear_u",
          [](int dim, std::vector<double> knots, std::vector<double> values,
             const std::vector<std::tuple<int, int, double>>& v) {
            return HamiltonianModel::nonlinear_u(dim, PiecewiseLinear(knots, values),
                                                 potential_from(v));
          },
          py::arg("dim"), py::arg("knots"), py::arg("values"),
          py::arg("potential") = std::vector<std::tuple<int, int, double>>{})
      .def_property_readonly("family", [](const HamiltonianModel& h) { return std::string(to_string(h.family)); })
      .def_readonly("dim", &HamiltonianModel::dim)
      .def_readonly("lam", &HamiltonianModel::lambda)
      .def_readwrite("shift", &HamiltonianModel::shift)
      .def("H",
           [](const HamiltonianModel& h, std::array<double, 2> x, double u, std::array<double, 2> p) {
             return eval_H(h, TorusPoint::wrapped(x, h.dim), u, p);
           },
           py::arg("x"), py::arg("u"), py::arg("p"))
      .def("L",
           [](const HamiltonianModel& h, std::array<double, 2> x, double u, std::array<double, 2> v) {
             return legendre_transform(h, TorusPoint::wrapped(x, h.dim), u, v).value;
           },
           py::arg("x"), py::arg("u"), py::arg("v"))
      .def("normalize", [](const HamiltonianModel& h, double c) { return normalize(h, c); });

  m.def("set_num_threads", &set_num_threads);
  m.def("num_threads", &num_threads);

  m.def(
      "fixed_point",
      [](const HamiltonianModel& h, py::array_t<double> phi, double T, double dt, double v_max,
         const std::string& quadrature, double tol, int max_iter) {
        const Grid g(h.dim, h.dim == 1 ? int(phi.size()) : int(phi.shape(0)));
        auto r = fixed_point(h, from_array(g, phi), T, make_opts(dt, v_max, quadrature, tol, max_iter));
        return py::make_tuple(slab_array(r.field), report_dict(r.report));
      },
      py::arg("model"), py::arg("phi"), py::arg("T"), py::arg("dt"), py::arg("v_max") = 6.0,
      py::arg("quadrature") = "corrected", py::arg("tol") = 1e-10, py::arg("max_iter") = 100,
      "Picard fixed point over [0, T]; returns (slab, report).");

  m.def(
      "step",
      [](const HamiltonianModel& h, py::array_t<double> phi, double t, double dt, double v_max,
         const std::string& quadrature, double tol) {
        const Grid g(h.dim, h.dim == 1 ? int(phi.size()) : int(phi.shape(0)));
        return field_array(step_T(h, from_array(g, phi), t, make_opts(dt, v_max, quadrature, tol, 100)));
      },
      py::arg("model"), py::arg("phi"), py::arg("t"), py::arg("dt"), py::arg("v_max") = 6.0,
      py::arg("quadrature") = "corrected", py::arg("tol") = 1e-10, "T_t phi.");

  m.def(
      "converge",
      [](const HamiltonianModel& h, py::array_t<double> phi, double dt, double v_max,
         const std::string& quadrature, double t_final, double stop_eps) {
        const Grid g(h.dim, h.dim == 1 ? int(phi.size()) : int(phi.shape(0)));
        auto r = converge(h, from_array(g, phi), make_opts(dt, v_max, quadrature, 1e-10, 100),
                          t_final, stop_eps);
        py::dict d;
        d["converged"] = r.converged;
        d["times"] = r.times;
        d["increments"] = r.increments;
        d["drift_rate"] = r.drift_rate;
        d["u_inf"] = field_array(r.u_inf);
        d["residual_max"] = r.residual.max_abs;
        d["kink_count"] = r.residual.kink_count;
        return d;
      },
      py::arg("model"), py::arg("phi"), py::arg("dt"), py::arg("v_max") = 6.0,
      py::arg("quadrature") = "corrected", py::arg("t_final") = 50.0, py::arg("stop_eps") = 1e-6);

  m.def(
      "critical_value",
      [](const HamiltonianModel& h, int n, double dt, double v_max, double level, double T_max,
         double tol) {
        auto r = critical_value(h, level, Grid(h.dim, n), make_disc(dt, v_max, "corrected"), T_max, tol);
        py::dict d;
        d["c"] = r.c;
        d["cauchy"] = r.cauchy;
        d["horizons"] = r.horizons;
        d["estimates"] = r.estimates;
        return d;
      },
      py::arg("model"), py::arg("N"), py::arg("dt"), py::arg("v_max") = 6.0,
      py::arg("level") = 0.0, py::arg("T_max") = 16.0, py::arg("tol") = 1e-3);

  m.def(
      "min_action",
      [](const HamiltonianModel& h, int n, double t, double dt, double v_max, double level) {
        const Grid g(h.dim, n);
        auto tab = min_action(h, level, t, g, make_disc(dt, v_max, "corrected"));
        const auto s = py::ssize_t(g.size());
        return to_array(tab.values).reshape({s, s});
      },
      py::arg("model"), py::arg("N"), py::arg("t"), py::arg("dt"), py::arg("v_max") = 6.0,
      py::arg("level") = 0.0, "Table h_t(x_i, x_j) on flat grid indices.");

  m.def(
      "flow",
      [](const HamiltonianModel& h, std::array<double, 2> x, double u, std::array<double, 2> p,
         double t, double dt_ode) {
        CharacteristicState s0;
        s0.x = TorusPoint::wrapped(x, h.dim);
        s0.u = u;
        s0.p = p;
        const auto tr = flow(h, s0, t, dt_ode);
        const auto n = py::ssize_t(tr.states.size());
        py::array_t<double> out({n, py::ssize_t(7)});
        auto a = out.mutable_unchecked<2>();
        for (py::ssize_t k = 0; k < n; ++k) {
          const auto& s = tr.states[std::size_t(k)];
          a(k, 0) = s.t;
          a(k, 1) = s.x.x[0];
          a(k, 2) = s.x.x[1];
          a(k, 3) = s.u;
          a(k, 4) = s.p[0];
          a(k, 5) = s.p[1];
          a(k, 6) = tr.H_values[std::size_t(k)];
        }
        const auto law = dH_law_residual(h, tr);
        return py::make_tuple(out, law.rms, sign_consistent(tr));
      },
      py::arg("model"), py::arg("x"), py::arg("u"), py::arg("p"), py::arg("t"),
      py::arg("dt_ode") = 1e-3,
      "RK4 characteristic; returns (states[t,x1,x2,u,p1,p2,H], law_rms, sign_consistent).");

  m.def(
      "lax_friedrichs",
      [](const HamiltonianModel& h, py::array_t<double> phi, double T, double alpha, double dt_fd) {
        const Grid g(h.dim, h.dim == 1 ? int(phi.size()) : int(phi.shape(0)));
        if (dt_fd <= 0.0) dt_fd = lf_dt_for(h, g, alpha, T);
        const LFConfig cfg{alpha, dt_fd, g};
        const auto slab = lf_solve(h, from_array(g, phi), T, cfg, alpha - 0.1, step_count(T, dt_fd));
        return field_array(slab.slice_field(slab.n_steps()));
      },
      py::arg("model"), py::arg("phi"), py::arg("T"), py::arg("alpha"), py::arg("dt_fd") = 0.0);

  m.def(
      "weak_kam_residual",
      [](const HamiltonianModel& h, py::array_t<double> u) {
        const Grid g(h.dim, h.dim == 1 ? int(u.size()) : int(u.shape(0)));
        const auto r = weak_kam_residual(h, from_array(g, u));
        py::dict d;
        d["max_abs"] = r.max_abs;
        d["rms"] = r.rms;
        d["kink_count"] = r.kink_count;
        d["kinks"] = r.kinks;
        return d;
      },
      py::arg("model"), py::arg("u"));

  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config,
         const std::filesystem::path& out, int threads, bool overwrite) {
        CommandOptions o{config, out, threads, overwrite};
        std::ostringstream log, err;
        const int code = run_command(command, o, log, err);
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("threads") = 1,
      py::arg("overwrite") = false, "Runs a CLI command; returns (exit_code, log, errors).");
}
