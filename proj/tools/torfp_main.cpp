#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "torfp/flops.hpp"
#include "torfp/matrix_io.hpp"
#include "torfp/precision.hpp"
#include "torfp/scheduler.hpp"
#include "torfp/subsets.hpp"
#include "torfp/torontonian.hpp"

using nlohmann::json;

namespace {

json precision_json(const torfp::PrecisionConfig& c) {
    return json{{"width_bits", c.width_bits}, {"frac_bits", c.frac_bits},
                {"b_lower", c.b_lower},       {"b_upper", c.b_upper},
                {"b_sgn", c.b_sgn},           {"b_accum", c.b_accum},
                {"a_repr", c.a_repr},         {"k_corr", c.k_corr}};
}

json counters_json(const torfp::OpCounters& c) {
    return json{{"mults", c.mults}, {"adds", c.adds}, {"recips", c.recips},
                {"rsqrts", c.rsqrts}};
}

// Exact when it fits a JSON integer, decimal string beyond that.
json flops_json(unsigned __int128 v) {
    if (v <= static_cast<unsigned __int128>(UINT64_MAX))
        return json(static_cast<std::uint64_t>(v));
    return json(torfp::decimal_string(v));
}

torfp::ClickPattern parse_pattern(const std::string& s, int modes) {
    if (modes > 64)
        throw torfp::InvalidArgument("matrixio/pattern", "patterns support up to 64 modes");
    if (static_cast<int>(s.size()) != modes)
        throw torfp::InvalidArgument("matrixio/pattern",
                                     "pattern length " + std::to_string(s.size()) +
                                         " does not match " + std::to_string(modes) + " modes");
    torfp::ClickPattern p{0, modes};
    for (int k = 0; k < modes; ++k) {
        if (s[static_cast<std::size_t>(k)] == '1') p.bits |= 1ULL << k;
        else if (s[static_cast<std::size_t>(k)] != '0')
            throw torfp::InvalidArgument("matrixio/pattern", "pattern must be over {0,1}");
    }
    return p;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw torfp::ParseError("scheduler/parse", "cannot open " + path, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

torfp::PrecisionChoice parse_precision(const std::string& s) {
    if (s == "128") return torfp::PrecisionChoice::Bits128;
    if (s == "256") return torfp::PrecisionChoice::Bits256;
    return torfp::PrecisionChoice::Auto;
}

int significant_digits(const torfp::PrecisionConfig& c) {
    return static_cast<int>(std::floor(c.b_sgn / std::log2(10.0)));
}

void emit(const json& doc, bool as_json, const std::string& human) {
    if (as_json) std::cout << doc.dump(2) << "\n";
    else std::cout << human << "\n";
}

int run_compute(const std::string& input, const std::string& precision, int workers,
                const std::string& pattern, bool as_json) {
    const auto full = torfp::load_matrix_file(input);
    json doc{{"command", "compute"}, {"input", input}, {"modes", full.n_modes}};

    if (!pattern.empty()) {
        const auto s = parse_pattern(pattern, full.n_modes);
        doc["pattern"] = pattern;
        const double det = torfp::det_i_minus_a_float(full);
        if (!(det > 0.0))
            throw torfp::Error("torontonian/invalid-state", "det(I-A) must be positive");
        if (s.clicks() == 0) {
            const double p = std::sqrt(det);
            doc["value"] = p;
            emit(doc, as_json, "p(" + pattern + ") = " + std::to_string(p) +
                                   "  (empty pattern, no factorizations)");
            return 0;
        }
        const auto sub = torfp::extract_submatrix(full, s);
        const auto r = torfp::torontonian(sub, parse_precision(precision), workers);
        const double p = r.value * std::sqrt(det);
        doc["value"] = p;
        doc["torontonian"] = r.value;
        doc["computed_modes"] = sub.n_modes;
        doc["precision"] = precision_json(r.config);
        doc["workers"] = r.workers;
        doc["wall_time_s"] = r.wall_seconds;
        doc["significant_digits"] = significant_digits(r.config);
        doc["term_count"] = r.term_count;
        doc["counters"] = counters_json(r.counters);
        const auto flops = torfp::total_op_count(sub.n_modes);
        doc["flops_formula"] = flops_json(flops);
        doc["sustained_flops"] =
            r.wall_seconds > 0.0 ? static_cast<double>(flops) / r.wall_seconds : 0.0;
        std::ostringstream human;
        human << "p(" << pattern << ") = " << p << "  (" << sub.n_modes << " of " << full.n_modes
              << " modes, " << r.config.width_bits << "-bit, f=" << r.config.frac_bits
              << ", workers=" << r.workers << ", " << r.wall_seconds << " s)";
        emit(doc, as_json, human.str());
        return 0;
    }

    const auto r = torfp::torontonian(full, parse_precision(precision), workers);
    doc["value"] = r.value;
    doc["precision"] = precision_json(r.config);
    doc["workers"] = r.workers;
    doc["wall_time_s"] = r.wall_seconds;
    doc["significant_digits"] = significant_digits(r.config);
    doc["term_count"] = r.term_count;
    doc["counters"] = counters_json(r.counters);
    const auto flops = torfp::total_op_count(full.n_modes);
    doc["flops_formula"] = flops_json(flops);
    doc["sustained_flops"] =
        r.wall_seconds > 0.0 ? static_cast<double>(flops) / r.wall_seconds : 0.0;
    std::ostringstream human;
    human << "torontonian = " << r.value << "  (N=" << full.n_modes << ", "
          << r.config.width_bits << "-bit, f=" << r.config.frac_bits << ", workers=" << r.workers
          << ", " << r.wall_seconds << " s)";
    emit(doc, as_json, human.str());
    return 0;
}

int run_oracle(const std::string& input, const std::string& pattern, bool as_json) {
    const auto full = torfp::load_matrix_file(input);
    json doc{{"command", "oracle"}, {"input", input}, {"modes", full.n_modes}};
    const auto t0 = std::chrono::steady_clock::now();
    double value;
    if (!pattern.empty()) {
        const auto s = parse_pattern(pattern, full.n_modes);
        doc["pattern"] = pattern;
        value = torfp::probability_reference(full, s);
    } else {
        value = torfp::torontonian_reference(full);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    doc["value"] = value;
    doc["wall_time_s"] = wall;
    std::ostringstream human;
    human << "oracle = " << value << "  (N=" << full.n_modes << ", double precision, " << wall
          << " s)";
    emit(doc, as_json, human.str());
    return 0;
}

int run_gen(int modes, std::uint64_t seed, double a_mean, double spread,
            const std::string& output, const std::string& format, int bits, bool as_json) {
    const auto a = torfp::generate_instance(modes, a_mean, spread, seed);
    const auto fmt = format == "text" ? torfp::MatrixFormat::Text : torfp::MatrixFormat::Binary;
    torfp::save_matrix_file(a, output, fmt, bits);
    json doc{{"command", "gen"},   {"modes", modes},   {"seed", seed},
             {"a_mean", a_mean},   {"spread", spread}, {"output", output},
             {"format", format}};
    if (fmt == torfp::MatrixFormat::Binary) doc["bits"] = bits;
    emit(doc, as_json,
         "wrote " + output + " (" + std::to_string(modes) + " modes, " + format + ")");
    return 0;
}

int run_compress(const std::string& input, const std::string& output, const std::string& format,
                 int bits, bool as_json) {
    const auto a = torfp::load_matrix_file(input);
    const auto fmt = format == "text" ? torfp::MatrixFormat::Text : torfp::MatrixFormat::Binary;
    const auto bytes = torfp::save_matrix(a, fmt, bits);
    std::ofstream out(output, std::ios::binary);
    if (!out) throw torfp::ParseError("matrixio/io", "cannot open " + output, 0);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw torfp::ParseError("matrixio/io", "short write to " + output, 0);
    json doc{{"command", "compress"}, {"input", input},        {"output", output},
             {"format", format},      {"bytes", bytes.size()}, {"modes", a.n_modes}};
    if (fmt == torfp::MatrixFormat::Binary) doc["bits"] = bits;
    emit(doc, as_json,
         "wrote " + output + " (" + std::to_string(bytes.size()) + " bytes, " + format + ")");
    return 0;
}

int run_partition_check(int modes, int nproc, bool as_json) {
    if (modes < 1 || modes > 20)
        throw torfp::InvalidArgument("subsets/range", "exhaustive check needs 1 <= N <= 20");
    const std::uint64_t total = (1ULL << modes) - 1;
    std::vector<std::uint8_t> seen(total + 1, 0);
    std::uint64_t covered = 0;
    int max_imbalance = 0;
    for (int z = 1; z <= modes; ++z) {
        std::uint64_t lo = UINT64_MAX, hi = 0;
        for (int rank = 0; rank < nproc; ++rank) {
            const auto w = torfp::partition(modes, rank, nproc);
            const auto& r = w.ranges[static_cast<std::size_t>(z - 1)];
            lo = std::min(lo, r.count);
            hi = std::max(hi, r.count);
            torfp::SubsetMask m = r.start_mask;
            for (std::uint64_t i = 0; i < r.count; ++i) {
                if (m == 0 || m > total)
                    throw torfp::Error("subsets/range", "walk left the mask domain");
                if (seen[m]++)
                    throw torfp::Error("subsets/range", "mask assigned twice");
                ++covered;
                m = torfp::get_next_mask(m);
            }
            if (r.count > 0 && m != r.end_mask)
                throw torfp::Error("subsets/range", "walk did not land on end_mask");
        }
        max_imbalance = std::max(max_imbalance, static_cast<int>(hi - lo));
    }
    if (covered != total) throw torfp::Error("subsets/range", "coverage incomplete");
    json doc{{"command", "partition-check"}, {"modes", modes},   {"nproc", nproc},
             {"covered", covered},           {"disjoint", true}, {"max_imbalance", max_imbalance}};
    emit(doc, as_json, "coverage OK, max imbalance " + std::to_string(max_imbalance));
    return 0;
}

int run_flops(int photons, int matrix_dim, bool as_json) {
    if (matrix_dim > 0) {
        const auto per = torfp::factorization_op_count(matrix_dim);
        json doc{{"command", "flops"}, {"matrix_dim", matrix_dim}, {"ops", per}};
        emit(doc, as_json, std::to_string(per));
        return 0;
    }
    const auto total = torfp::total_op_count(photons);
    json doc{{"command", "flops"}, {"photons", photons}, {"total_ops", flops_json(total)}};
    emit(doc, as_json, torfp::decimal_string(total));
    return 0;
}

int run_sched(const std::string& dag_path, bool brute, bool expand, const std::string& writeback,
              bool as_json) {
    auto dag = torfp::load_dag(read_text_file(dag_path));
    if (expand) dag = torfp::expand_dag(dag);
    torfp::SchedulerModel model{writeback == "global"};
    const auto s = brute ? torfp::brute_force_schedule(dag, model)
                         : torfp::astar_schedule(dag, model);
    if (as_json) {
        json order = json::array();
        for (std::size_t i = 0; i < s.order.size(); ++i)
            order.push_back({{"node", s.order[i].node},
                             {"member", s.order[i].member},
                             {"cycle", s.issue_cycle[i]},
                             {"pipeline", s.pipeline[i] == torfp::Pipeline::P0 ? "P0" : "P1"}});
        json doc{{"command", "sched"},      {"dag", dag_path},     {"method", brute ? "brute" : "astar"},
                 {"writeback", writeback},  {"makespan", s.makespan}, {"order", order}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << torfp::report(s, dag);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-point Torontonian toolkit"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "emit a JSON report instead of plain text");

    auto* compute = app.add_subcommand("compute", "evaluate the Torontonian of an instance");
    std::string in_path, precision = "auto", pattern;
    int workers = 0;
    compute->add_option("--input", in_path, "matrix file (text or binary)")->required();
    compute->add_option("--precision", precision, "auto, 128 or 256")
        ->check(CLI::IsMember({"auto", "128", "256"}));
    compute->add_option("--workers", workers, "worker threads, 0 = hardware")
        ->check(CLI::Range(0, 256));
    compute->add_option("--pattern", pattern, "click pattern, e.g. 1011 (mode 0 first)");

    auto* oracle = app.add_subcommand("oracle", "double-precision reference evaluation");
    std::string o_in, o_pattern;
    oracle->add_option("--input", o_in, "matrix file")->required();
    oracle->add_option("--pattern", o_pattern, "click pattern");

    auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
    int g_modes = 0, g_bits = 16;
    std::uint64_t g_seed = 1;
    double g_mean = 0.16, g_spread = 0.06;
    std::string g_out, g_format = "binary";
    gen->add_option("--modes", g_modes, "mode count")->required()->check(CLI::Range(1, 1000));
    gen->add_option("--seed", g_seed, "PRNG seed");
    gen->add_option("--a-mean", g_mean, "target mean diagonal");
    gen->add_option("--spread", g_spread, "spectral half-width");
    gen->add_option("--output", g_out, "output file")->required();
    gen->add_option("--format", g_format, "text or binary")
        ->check(CLI::IsMember({"text", "binary"}));
    gen->add_option("--bits", g_bits, "binary quantization bits")
        ->check(CLI::IsMember({16, 32}));

    auto* compress = app.add_subcommand("compress", "re-encode an instance file");
    std::string c_in, c_out, c_format = "binary";
    int c_bits = 16;
    compress->add_option("--input", c_in, "matrix file")->required();
    compress->add_option("--output", c_out, "output file")->required();
    compress->add_option("--format", c_format, "text or binary")
        ->check(CLI::IsMember({"text", "binary"}));
    compress->add_option("--bits", c_bits, "binary quantization bits")
        ->check(CLI::IsMember({16, 32}));

    auto* pcheck = app.add_subcommand("partition-check", "exhaustively verify a work split");
    int p_modes = 0, p_nproc = 1;
    pcheck->add_option("--modes", p_modes, "mode count (<= 20)")->required();
    pcheck->add_option("--workers", p_nproc, "worker count")->required()->check(CLI::Range(1, 1000000));

    auto* flops = app.add_subcommand("flops", "operation count for a full evaluation");
    int f_photons = 0, f_dim = 0;
    flops->add_option("--photons", f_photons, "mode count N");
    flops->add_option("--matrix-dim", f_dim, "single matrix dimension d instead of a full sum");

    auto* sched = app.add_subcommand("sched", "schedule an instruction DAG");
    std::string s_dag, s_writeback = "pipeline";
    bool s_brute = false, s_expand = false;
    sched->add_option("--dag", s_dag, "DAG file")->required();
    sched->add_flag("--brute-force", s_brute, "exhaustive search (<= 9 instructions)");
    sched->add_flag("--expand", s_expand, "drop fixed group order before searching");
    sched->add_option("--writeback", s_writeback, "pipeline or global port model")
        ->check(CLI::IsMember({"pipeline", "global"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*compute) return run_compute(in_path, precision, workers, pattern, as_json);
        if (*oracle) return run_oracle(o_in, o_pattern, as_json);
        if (*gen) return run_gen(g_modes, g_seed, g_mean, g_spread, g_out, g_format, g_bits, as_json);
        if (*compress) return run_compress(c_in, c_out, c_format, c_bits, as_json);
        if (*pcheck) return run_partition_check(p_modes, p_nproc, as_json);
        if (*flops) {
            if (f_photons <= 0 && f_dim <= 0)
                throw torfp::InvalidArgument("subsets/range",
                                             "flops needs --photons or --matrix-dim");
            return run_flops(f_photons, f_dim, as_json);
        }
        if (*sched) return run_sched(s_dag, s_brute, s_expand, s_writeback, as_json);
    } catch (const torfp::Error& e) {
        json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", {{"code", "cli/internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
