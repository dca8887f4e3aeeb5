#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "torfp/flops.hpp"
#include "torfp/matrix_io.hpp"
#include "torfp/precision.hpp"
#include "torfp/scheduler.hpp"
#include "torfp/subsets.hpp"
#include "torfp/torontonian.hpp"

namespace py = pybind11;
using namespace torfp;

namespace {

py::array_t<std::complex<double>> dense_array(const InputMatrix& a) {
    const int d = 2 * a.n_modes;
    const auto v = to_dense(a);
    py::array_t<std::complex<double>> out({d, d});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

InputMatrix from_dense(py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1) || arr.shape(0) % 2 != 0 ||
        arr.shape(0) == 0)
        throw InvalidArgument("matrixio/dim", "expected a square 2N x 2N array, N >= 1");
    const int d = static_cast<int>(arr.shape(0));
    const int n = d / 2;
    std::vector<std::complex<double>> dense(arr.data(), arr.data() + d * d);
    const auto rep = check_symmetries(dense, d);
    if (!rep.pass)
        throw Error("torontonian/symmetry",
                    "input violates the block symmetries beyond 1e-12");
    InputMatrix m;
    m.n_modes = n;
    m.a00.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    m.a01.reserve(m.a00.capacity());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.a00.push_back(dense[static_cast<std::size_t>(i) * d + j]);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            m.a01.push_back(dense[static_cast<std::size_t>(i) * d + j + n]);
    return m;
}

PrecisionChoice choice_from(const std::string& s) {
    if (s == "auto") return PrecisionChoice::Auto;
    if (s == "128") return PrecisionChoice::Bits128;
    if (s == "256") return PrecisionChoice::Bits256;
    throw InvalidArgument("precision/range", "precision must be auto, 128 or 256");
}

py::dict config_dict(const PrecisionConfig& c) {
    py::dict d;
    d["width_bits"] = c.width_bits;
    d["frac_bits"] = c.frac_bits;
    d["b_lower"] = c.b_lower;
    d["b_upper"] = c.b_upper;
    d["b_sgn"] = c.b_sgn;
    d["b_accum"] = c.b_accum;
    d["a_repr"] = c.a_repr;
    d["k_corr"] = c.k_corr;
    return d;
}

py::dict result_dict(const TorontonianResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["raw_limbs"] = py::make_tuple(r.raw.limbs[0], r.raw.limbs[1], r.raw.limbs[2], r.raw.limbs[3]);
    d["width_bits"] = r.raw.width_bits;
    d["config"] = config_dict(r.config);
    d["term_count"] = r.term_count;
    py::dict ops;
    ops["mults"] = r.counters.mults;
    ops["adds"] = r.counters.adds;
    ops["recips"] = r.counters.recips;
    ops["rsqrts"] = r.counters.rsqrts;
    d["counters"] = ops;
    d["wall_seconds"] = r.wall_seconds;
    d["workers"] = r.workers;
    return d;
}

py::object py_bigint(unsigned __int128 v) {
    return py::module_::import("builtins").attr("int")(decimal_string(v));
}

py::dict schedule_dict(const Schedule& s) {
    py::dict d;
    d["makespan"] = s.makespan;
    py::list order;
    for (std::size_t i = 0; i < s.order.size(); ++i)
        order.append(py::make_tuple(s.order[i].node, s.order[i].member, s.issue_cycle[i],
                                    s.pipeline[i] == Pipeline::P0 ? "P0" : "P1"));
    d["order"] = order;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fixed-point Torontonian evaluation, instance generation and "
              "dual-pipeline instruction scheduling";

    py::register_exception<Error>(m, "TorfpError", PyExc_RuntimeError);

    py::class_<InputMatrix>(m, "InputMatrix")
        .def_readonly("n_modes", &InputMatrix::n_modes)
        .def_readonly("quant_bits", &InputMatrix::quant_bits)
        .def("to_dense", &dense_array, "full 2N x 2N complex matrix")
        .def("save", [](const InputMatrix& a, const std::string& path, const std::string& format,
                        int bits) {
            save_matrix_file(a, path,
                             format == "text" ? MatrixFormat::Text : MatrixFormat::Binary, bits);
        }, py::arg("path"), py::arg("format") = "binary", py::arg("bits") = 16)
        .def("__repr__", [](const InputMatrix& a) {
            return "<InputMatrix of " + std::to_string(a.n_modes) + " modes>";
        });

    m.def("generate_instance", &generate_instance, py::arg("n_modes"), py::arg("a_target"),
          py::arg("spread"), py::arg("seed"),
          "synthetic instance with spectrum inside (a_target - spread, a_target + spread)");
    m.def("load_matrix", &load_matrix_file, py::arg("path"), "load a text or binary instance file");
    m.def("from_dense", &from_dense, py::arg("dense"),
          "build an instance from a full 2N x 2N array (symmetries checked)");
    m.def("check_symmetries", [](const InputMatrix& a) {
        const auto rep = check_symmetries(to_dense(a), 2 * a.n_modes);
        py::dict d;
        d["hermitian_dev"] = rep.hermitian_dev;
        d["a01_sym_dev"] = rep.a01_sym_dev;
        d["block_conj_dev"] = rep.block_conj_dev;
        d["tolerance"] = rep.tolerance;
        d["pass"] = rep.pass;
        return d;
    }, py::arg("matrix"));
    m.def("extract_submatrix", [](const InputMatrix& a, std::uint64_t bits) {
        return extract_submatrix(a, ClickPattern{bits, a.n_modes});
    }, py::arg("matrix"), py::arg("pattern_bits"),
       "principal submatrix over clicked modes; bit k selects mode k");
    m.def("quantize", &quantize, py::arg("x"), py::arg("bits"));
    m.def("dequantize", &dequantize, py::arg("q"), py::arg("bits"));

    m.def("torontonian", [](const InputMatrix& a, const std::string& precision, int workers) {
        TorontonianResult r;
        {
            // the dict below needs the GIL; drop it only for the compute
            py::gil_scoped_release release;
            r = torontonian(a, choice_from(precision), workers);
        }
        return result_dict(r);
    }, py::arg("matrix"), py::arg("precision") = "auto", py::arg("workers") = 0);
    m.def("torontonian_reference", &torontonian_reference, py::arg("matrix"),
          "double-precision oracle, N <= 20");
    m.def("probability", [](const InputMatrix& a, std::uint64_t bits, int workers) {
        return probability(a, ClickPattern{bits, a.n_modes}, workers);
    }, py::arg("matrix"), py::arg("pattern_bits"), py::arg("workers") = 0,
       py::call_guard<py::gil_scoped_release>());
    m.def("probability_reference", [](const InputMatrix& a, std::uint64_t bits) {
        return probability_reference(a, ClickPattern{bits, a.n_modes});
    }, py::arg("matrix"), py::arg("pattern_bits"));

    m.def("select_precision", [](const InputMatrix& a, int n, int sig, double alpha) {
        return config_dict(select_precision(a, n, sig, alpha));
    }, py::arg("matrix"), py::arg("n_modes"), py::arg("sig_decimal_digits") = 3,
       py::arg("alpha") = 0.5);

    m.def("binom", &binom, py::arg("n"), py::arg("k"));
    m.def("get_kth_mask", &get_kth_mask, py::arg("n"), py::arg("z"), py::arg("k"));
    m.def("get_next_mask", &get_next_mask, py::arg("mask"));
    m.def("partition", [](int modes, int rank, int nproc) {
        const auto w = partition(modes, rank, nproc);
        py::list out;
        for (const auto& r : w.ranges)
            out.append(py::make_tuple(r.start_mask, r.end_mask, r.count));
        return out;
    }, py::arg("modes"), py::arg("rank"), py::arg("nproc"),
       "per-|Z| (start_mask, end_mask, count) ranges for one worker");

    m.def("factorization_op_count", &factorization_op_count, py::arg("dim"));
    m.def("total_op_count", [](int n) { return py_bigint(total_op_count(n)); }, py::arg("n_modes"));

    m.def("load_dag", &load_dag, py::arg("text"));
    m.def("emit_dag", &emit_dag, py::arg("dag"));
    py::class_<InstructionDAG>(m, "InstructionDAG")
        .def("__repr__", [](const InstructionDAG& d) {
            return "<InstructionDAG " + std::to_string(d.nodes.size()) + " nodes " +
                   std::to_string(d.edges.size()) + " edges>";
        });
    m.def("expand_dag", &expand_dag, py::arg("dag"));
    m.def("schedule", [](const InstructionDAG& dag, bool brute, bool global_writeback) {
        const SchedulerModel model{global_writeback};
        return schedule_dict(brute ? brute_force_schedule(dag, model)
                                   : astar_schedule(dag, model));
    }, py::arg("dag"), py::arg("brute") = false, py::arg("global_writeback") = false);
    m.def("simulate", [](const InstructionDAG& dag, const std::vector<std::pair<int, int>>& order,
                         bool global_writeback) {
        std::vector<InstrRef> refs;
        refs.reserve(order.size());
        for (const auto& [node, member] : order) refs.push_back({node, member});
        return schedule_dict(simulate(dag, refs, SchedulerModel{global_writeback}));
    }, py::arg("dag"), py::arg("order"), py::arg("global_writeback") = false);
}
