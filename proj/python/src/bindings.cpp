// Copyright 2026 The Cheshire Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "cheshire/errors.hpp"
#include "cheshire/hilbert.hpp"
#include "cheshire/indicator.hpp"
#include "cheshire/meters.hpp"
#include "cheshire/oracle.hpp"
#include "cheshire/sampler.hpp"
#include "cheshire/statistics.hpp"
#include "cheshire/weak_values.hpp"

namespace py = pybind11;
using namespace cheshire;

namespace {

py::dict weak_values_dict(const WeakValueSet &w) {
    py::dict d;
    d["left"] = w.left;
    d["right"] = w.right;
    d["sigma"] = w.sigma;
    d["sigma_left"] = w.sigma_left;
    d["sigma_right"] = w.sigma_right;
    d["left_right"] = w.left_right;
    d["left_left"] = w.left_left;
    d["right_right"] = w.right_right;
    d["sigma_sigma"] = w.sigma_sigma;
    return d;
}

py::dict moments_dict(const MomentReport &m) {
    py::dict d;
    d["mean_x"] = m.mean_x;
    d["mean_y"] = m.mean_y;
    d["cross_xy"] = m.cross_xy;
    d["cross_xy2"] = m.cross_xy2;
    d["norm_N"] = m.norm_N;
    d["p_postselect"] = m.p_postselect;
    return d;
}

py::dict limit_dict(const LimitMoments &m) {
    py::dict d;
    d["mean_x"] = m.mean_x;
    d["mean_y"] = m.mean_y;
    d["cross_xy"] = m.cross_xy;
    d["norm"] = m.norm;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Post-selected two-meter readout statistics";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ZeroPostselection>(m, "ZeroPostselection", PyExc_ArithmeticError);
    py::register_exception<NearOrthogonal>(m, "NearOrthogonal", PyExc_ArithmeticError);
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> divergent;
    divergent.call_once_and_store_result(
        [&]() { return py::exception<DivergentLimit>(m, "DivergentLimit", PyExc_ArithmeticError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const DivergentLimit &e) {
            py::set_error(divergent.get_stored(), (std::string(e.what()) + " (" + e.scaling() + ")").c_str());
        }
    });

    py::class_<BlochAxis>(m, "BlochAxis")
        .def(py::init<>())
        .def_static("from_vector", &BlochAxis::from_vector, py::arg("x"), py::arg("y"), py::arg("z"))
        .def_static("from_angles", &BlochAxis::from_angles, py::arg("theta"), py::arg("phi"))
        .def_property_readonly("vector", &BlochAxis::vector)
        .def_property_readonly("theta", &BlochAxis::theta)
        .def_property_readonly("phi", &BlochAxis::phi);

    py::class_<PureState>(m, "PureState")
        .def_static("from_amplitudes", &PureState::from_amplitudes, py::arg("amplitudes"),
                    "Lab-basis amplitudes (L,H), (L,V), (R,H), (R,V); normalized on construction.")
        .def_static("from_axis_amplitudes", &PureState::from_axis_amplitudes, py::arg("amplitudes"), py::arg("axis"))
        .def_property_readonly("amplitudes", &PureState::amplitudes)
        .def("inner", &PureState::inner);

    py::class_<SystemOperator>(m, "SystemOperator")
        .def(py::init<Mat4>(), py::arg("matrix"))
        .def_static("identity", &SystemOperator::identity)
        .def_static("projector", &SystemOperator::projector, py::arg("state"))
        .def_property_readonly("matrix", &SystemOperator::matrix);

    m.def("projector_left", &projector_left);
    m.def("projector_right", &projector_right);
    m.def("sigma_r", &sigma_r, py::arg("axis"));
    m.def("complement", &complement, py::arg("effect"));

    py::class_<GaussianMeter>(m, "GaussianMeter")
        .def(py::init<double, double>(), py::arg("epsilon"), py::arg("epsilon_tilde"))
        .def_static("pure", &GaussianMeter::pure, py::arg("epsilon"))
        .def_property_readonly("epsilon", &GaussianMeter::epsilon)
        .def_property_readonly("epsilon_tilde", &GaussianMeter::epsilon_tilde)
        .def_property_readonly("is_pure", &GaussianMeter::is_pure)
        .def("__repr__", [](const GaussianMeter &g) {
            return "GaussianMeter(epsilon=" + std::to_string(g.epsilon()) + ", epsilon_tilde=" +
                   std::to_string(g.epsilon_tilde()) + ")";
        });
    m.def("w_factor", [](double epsilon_tilde) { return w_factor(epsilon_tilde); }, py::arg("epsilon_tilde"));
    m.def("classify_regime", [](const GaussianMeter &g) {
        const Regime r = classify_regime(g);
        return py::make_tuple(std::string(to_string(r.label)), r.crossover);
    });

    py::class_<Experiment>(m, "Experiment")
        .def(py::init<SystemOperator, SystemOperator, BlochAxis, GaussianMeter, GaussianMeter>(), py::arg("preparation"),
             py::arg("postselection"), py::arg("axis"), py::arg("meter_x"), py::arg("meter_y"))
        .def_static("pure", &Experiment::pure, py::arg("psi"), py::arg("phi"), py::arg("axis"), py::arg("meter_x"),
                    py::arg("meter_y"))
        .def_property_readonly("w_x", &Experiment::w_x)
        .def_property_readonly("w_y", &Experiment::w_y)
        .def_property_readonly("meter_x", &Experiment::meter_x)
        .def_property_readonly("meter_y", &Experiment::meter_y)
        .def("with_meters", &Experiment::with_meters, py::arg("meter_x"), py::arg("meter_y"))
        .def("with_postselection", &Experiment::with_postselection, py::arg("effect"))
        .def("weak_values", [](const Experiment &e) { return weak_values_dict(e.weak_values()); });

    m.def("weak_values", [](const PureState &psi, const PureState &phi, const BlochAxis &axis) {
        return weak_values_dict(weak_values_pure(psi, phi, axis));
    }, py::arg("psi"), py::arg("phi"), py::arg("axis") = BlochAxis());
    m.def("weak_values_general", [](const SystemOperator &rho, const SystemOperator &e, const BlochAxis &axis) {
        return weak_values_dict(weak_values_general(rho, e, axis));
    }, py::arg("preparation"), py::arg("postselection"), py::arg("axis") = BlochAxis());

    m.def("postselection_probability", &postselection_probability, py::arg("experiment"));
    m.def("moments", [](const Experiment &e) { return moments_dict(moments(e)); }, py::arg("experiment"));
    m.def("joint_density", [](const Experiment &e, py::array_t<double> x, py::array_t<double> y) {
        return py::vectorize([&e](double a, double b) { return joint_density(e, a, b); })(x, y);
    }, py::arg("experiment"), py::arg("x"), py::arg("y"), "Conditional density P{x, y | E_f}; broadcasts over x and y.");
    m.def("char_function", &char_function, py::arg("experiment"), py::arg("chi"), py::arg("eta"));
    m.def("limit_moments", [](const std::string &regime, const Experiment &e) {
        return limit_dict(limit_moments(parse_limit_regime(regime), e.weak_values()));
    }, py::arg("regime"), py::arg("experiment"));

    m.def("cheshire_parameter", [](const Experiment &e) {
        const CheshireReport r = cheshire_parameter(e);
        py::dict d;
        d["c_of_Ef"] = r.c_of_Ef;
        d["c_from_moments"] = r.c_from_moments;
        d["c_total"] = r.c_total;
        d["cross_xy"] = r.cross_xy;
        d["p_postselect"] = r.p_postselect;
        d["w_x"] = r.w_x;
        d["w_y"] = r.w_y;
        return d;
    }, py::arg("experiment"));
    m.def("complement_identity", &complement_identity, py::arg("experiment"));
    m.def("max_family", &max_family, py::arg("a"), py::arg("b"), py::arg("phi"), py::arg("axis") = BlochAxis());

    m.def("sample", [](const Experiment &e, std::uint64_t n_trials, std::uint64_t seed, double nu_x, double nu_y,
                       unsigned threads) {
        SamplerConfig cfg;
        cfg.n_trials = n_trials;
        cfg.seed = seed;
        cfg.threads = threads;
        if (nu_x != 0.0 || nu_y != 0.0) {
            cfg.noise = NoiseLevels{nu_x, nu_y};
        }
        TrialBatch batch;
        {
            py::gil_scoped_release release;
            batch = sample_trials(e, cfg);
        }
        const auto n = static_cast<py::ssize_t>(batch.records.size());
        py::array_t<bool> post(n);
        py::array_t<double> x(n), y(n), c(n);
        auto pp = post.mutable_unchecked<1>();
        auto px = x.mutable_unchecked<1>();
        auto py_ = y.mutable_unchecked<1>();
        auto pc = c.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < n; ++i) {
            const TrialRecord &r = batch.records[static_cast<std::size_t>(i)];
            pp(i) = r.postselected;
            px(i) = r.x;
            py_(i) = r.y;
            pc(i) = r.c;
        }
        const CheshireEstimate est = estimate_cheshire(batch.records);
        py::dict d;
        d["postselected"] = post;
        d["x"] = x;
        d["y"] = y;
        d["c"] = c;
        d["estimate"] = est.estimate;
        d["std_error"] = est.std_error;
        d["grid_fallback"] = batch.success.grid_fallback;
        return d;
    }, py::arg("experiment"), py::arg("n_trials"), py::arg("seed"), py::arg("nu_x") = 0.0, py::arg("nu_y") = 0.0,
       py::arg("threads") = 0u);

    m.def("oracle_residual", [](const Experiment &e, double spacing) {
        oracle::GriddedJoint gj;
        {
            py::gil_scoped_release release;
            gj = oracle::brute_force_joint(e.preparation(), e.postselection(), e.axis(),
                                           oracle::GriddedMeter::gaussian(e.meter_x(), spacing),
                                           oracle::GriddedMeter::gaussian(e.meter_y(), spacing));
        }
        return py::make_tuple(oracle::max_residual(gj, oracle::engine_density(e)),
                              gj.mass(oracle::Branch::Success) + gj.mass(oracle::Branch::Failure));
    }, py::arg("experiment"), py::arg("spacing") = oracle::kDefaultSpacing,
       "Max brute-force grid residual against the analytic engine, and the total grid mass.");
}
