#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lbai/countsketch.hpp"
#include "lbai/dyadic.hpp"
#include "lbai/harness.hpp"
#include "lbai/instance_io.hpp"
#include "lbai/lookahead.hpp"
#include "lbai/sparsity.hpp"

namespace py = pybind11;
using namespace lbai;

namespace {

// Experiments and instances cross the boundary as JSON text; the Python side decodes it.
std::string run_experiment_json(const std::string& config_text) {
    const auto config = ExperimentConfig::from_json(nlohmann::json::parse(config_text));
    const auto result = run_experiment(config);
    std::ostringstream out;
    write_json(config, result, out);
    return out.str();
}

std::string generate_instance_json(const std::string& spec_text) {
    return instance_to_json(build_instance(nlohmann::json::parse(spec_text))).dump();
}

py::dict bai_once(const std::string& spec_text, std::uint64_t seed, std::optional<double> phi) {
    const auto inst = build_instance(nlohmann::json::parse(spec_text));
    Rng rng(seed);
    const auto scales = default_scale_range(inst.horizon());
    const auto p = phi ? run_sparse_bai(inst, SparseBaiParams::defaults(inst.horizon(), *phi), scales, rng)
                       : run_bai(inst, scales, rng);
    const auto s = score(inst, p);
    py::dict d;
    d["m"] = p.window.m;
    d["b"] = p.window.b;
    d["t0"] = p.window.t0;
    d["w"] = p.window.w;
    d["arm"] = p.arm;
    d["error"] = s.error;
    d["best_arm"] = s.best_arm;
    d["bits"] = p.memory.total();
    d["queries"] = p.queries;
    return d;
}

}  // namespace

PYBIND11_MODULE(_lbai, m) {
    m.doc() = "Lookahead best-arm identification core";

    py::register_exception<PhiUndefined>(m, "PhiUndefined", PyExc_ValueError);

    m.def("run_experiment_json", &run_experiment_json, py::arg("config"));
    m.def("generate_instance_json", &generate_instance_json, py::arg("spec"));
    m.def("bai_once", &bai_once, py::arg("instance"), py::arg("seed"), py::arg("phi") = std::nullopt);

    m.def(
        "lemma1_gap",
        [](const std::vector<double>& seq, unsigned lo, unsigned hi) {
            const auto r = lemma1_gap(seq, {lo, hi});
            return py::make_tuple(r.expectation, r.bound ? py::object(py::float_(*r.bound)) : py::none());
        },
        py::arg("sequence"), py::arg("lo"), py::arg("hi"));
    m.def(
        "orthogonality_check",
        [](const std::vector<double>& seq, unsigned lower, unsigned upper) {
            const auto r = orthogonality_check(seq, lower, upper);
            return py::make_tuple(r.lhs, r.rhs);
        },
        py::arg("sequence"), py::arg("lower"), py::arg("upper"));
    m.def(
        "claim4_oracle",
        [](unsigned depth) {
            const auto v = claim4_oracle(depth);
            py::dict d;
            d["minimum"] = static_cast<double>(v.minimum);
            d["equal_parents"] = static_cast<double>(v.equal_parents);
            d["unequal_parents"] = static_cast<double>(v.unequal_parents);
            d["bound"] = static_cast<double>(v.bound);
            return d;
        },
        py::arg("depth"));
    m.def(
        "local_sparsity",
        [](const std::string& spec_text, Round window) {
            const auto p = local_sparsity(build_instance(nlohmann::json::parse(spec_text)), window);
            return py::make_tuple(p.phi, p.worst_window_start);
        },
        py::arg("instance"), py::arg("window"));

    py::class_<Sketch>(m, "Sketch")
        .def(py::init([](std::size_t universe, double phi, double eps, double delta, std::uint64_t n,
                         std::uint64_t seed) { return new_sketch(universe, phi, eps, delta, n, seed); }),
             py::arg("universe"), py::arg("phi"), py::arg("eps"), py::arg("delta"), py::arg("stream_length"),
             py::arg("seed"))
        .def("update", &Sketch::update, py::arg("item"), py::arg("weight") = 1.0)
        .def("estimate", &Sketch::estimate, py::arg("item"))
        .def("approx_top", &Sketch::approx_top)
        .def_property_readonly("bits", &Sketch::bits_used)
        .def_property_readonly("width", [](const Sketch& s) { return s.params().width; })
        .def_property_readonly("depth", [](const Sketch& s) { return s.params().depth; });
}
