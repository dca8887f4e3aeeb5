#include "torfp/scheduler.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace torfp {

namespace {

constexpr int kExpandLimit = 64;
constexpr std::size_t kStateBudget = 4'000'000;

struct Expanded {
    std::vector<int> node_index; // of dag.nodes
    std::vector<int> member;
    std::vector<int> latency;
    std::vector<int> pipe;
    std::vector<std::vector<int>> producers;
    std::vector<std::vector<int>> consumers;
    std::vector<int> first_of_node;
    std::vector<int> group_of_node;
    int total = 0;
};

// Validates node/edge consistency and acyclicity; throws the module's
// structured errors. Returns id -> node index.
std::unordered_map<int, int> validate_dag(const InstructionDAG& dag) {
    std::unordered_map<int, int> index;
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
        const auto& n = dag.nodes[i];
        if (n.latency < 1)
            throw InvalidArgument("scheduler/field", "latency must be >= 1 (node " +
                                                         std::to_string(n.id) + ")");
        if (n.group_count < 1)
            throw InvalidArgument("scheduler/field", "group_count must be >= 1 (node " +
                                                         std::to_string(n.id) + ")");
        if (!index.emplace(n.id, static_cast<int>(i)).second)
            throw InvalidArgument("scheduler/field", "duplicate node id " + std::to_string(n.id));
    }
    std::vector<std::vector<int>> adj(dag.nodes.size());
    for (const auto& e : dag.edges) {
        const auto f = index.find(e.from), t = index.find(e.to);
        if (f == index.end() || t == index.end())
            throw InvalidArgument("scheduler/edge", "edge references unknown node " +
                                                        std::to_string(f == index.end() ? e.from
                                                                                        : e.to));
        adj[static_cast<std::size_t>(f->second)].push_back(t->second);
    }

    // Cycle check with one cycle reported on failure. color: 0 new, 1 on
    // stack, 2 done.
    std::vector<int> color(dag.nodes.size(), 0), stack;
    std::string cycle_msg;
    auto dfs = [&](auto&& self, int v) -> bool {
        color[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (color[static_cast<std::size_t>(w)] == 1) {
                std::string msg = "dependency cycle:";
                const auto it = std::find(stack.begin(), stack.end(), w);
                for (auto jt = it; jt != stack.end(); ++jt)
                    msg += " " + std::to_string(dag.nodes[static_cast<std::size_t>(*jt)].id) +
                           " ->";
                msg += " " + std::to_string(dag.nodes[static_cast<std::size_t>(w)].id);
                cycle_msg = msg;
                return false;
            }
            if (color[static_cast<std::size_t>(w)] == 0 && !self(self, w)) return false;
        }
        stack.pop_back();
        color[static_cast<std::size_t>(v)] = 2;
        return true;
    };
    for (std::size_t v = 0; v < dag.nodes.size(); ++v)
        if (color[v] == 0 && !dfs(dfs, static_cast<int>(v)))
            throw Error("scheduler/cycle", cycle_msg);
    return index;
}

Expanded expand(const InstructionDAG& dag) {
    const auto index = validate_dag(dag);
    Expanded x;
    x.first_of_node.resize(dag.nodes.size());
    x.group_of_node.resize(dag.nodes.size());
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
        const auto& n = dag.nodes[i];
        x.first_of_node[i] = x.total;
        x.group_of_node[i] = n.group_count;
        for (int m = 0; m < n.group_count; ++m) {
            x.node_index.push_back(static_cast<int>(i));
            x.member.push_back(m);
            x.latency.push_back(n.latency);
            x.pipe.push_back(static_cast<int>(n.pipeline));
        }
        x.total += n.group_count;
        if (x.total > kExpandLimit)
            throw ResourceError("scheduler/resource",
                                "DAG expands past " + std::to_string(kExpandLimit) +
                                    " instructions; merge more work into groups");
    }
    x.producers.resize(static_cast<std::size_t>(x.total));
    x.consumers.resize(static_cast<std::size_t>(x.total));
    for (const auto& e : dag.edges) {
        const int a = index.at(e.from), b = index.at(e.to);
        const int ga = dag.nodes[static_cast<std::size_t>(a)].group_count;
        const int gb = dag.nodes[static_cast<std::size_t>(b)].group_count;
        const int fa = x.first_of_node[static_cast<std::size_t>(a)];
        const int fb = x.first_of_node[static_cast<std::size_t>(b)];
        if (ga == gb) {
            // Equal-size groups depend member-wise.
            for (int i = 0; i < ga; ++i) {
                x.producers[static_cast<std::size_t>(fb + i)].push_back(fa + i);
                x.consumers[static_cast<std::size_t>(fa + i)].push_back(fb + i);
            }
        } else {
            for (int i = 0; i < gb; ++i)
                for (int j = 0; j < ga; ++j) {
                    x.producers[static_cast<std::size_t>(fb + i)].push_back(fa + j);
                    x.consumers[static_cast<std::size_t>(fa + j)].push_back(fb + i);
                }
        }
    }
    return x;
}

struct PipeState {
    int last_issue = 0;
    std::vector<int> completions; // pending writeback cycles
};

bool has_completion(const PipeState& ps, int c) {
    return std::find(ps.completions.begin(), ps.completions.end(), c) != ps.completions.end();
}

int place_instr(PipeState pipes[2], bool global_wb, int pipe, int latency, int raw_ready) {
    int t = std::max(pipes[pipe].last_issue + 1, raw_ready);
    for (;;) {
        const int c = t + latency;
        const bool conflict = global_wb ? (has_completion(pipes[0], c) || has_completion(pipes[1], c))
                                        : has_completion(pipes[pipe], c);
        if (!conflict) break;
        ++t;
    }
    pipes[pipe].last_issue = t;
    pipes[pipe].completions.push_back(t + latency);
    return t;
}

} // namespace

Schedule simulate(const InstructionDAG& dag, const std::vector<InstrRef>& order,
                  const SchedulerModel& model) {
    const auto index = validate_dag(dag);
    const Expanded x = expand(dag);

    if (order.size() != static_cast<std::size_t>(x.total))
        throw InvalidArgument("scheduler/order", "order must list every expanded instruction");

    Schedule s;
    s.order = order;
    s.issue_cycle.resize(order.size());
    s.pipeline.resize(order.size());

    std::vector<int> next_member(dag.nodes.size(), 0);
    std::vector<int> completion(static_cast<std::size_t>(x.total), 0);
    std::vector<bool> scheduled(static_cast<std::size_t>(x.total), false);
    PipeState pipes[2];

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const InstrRef r = order[pos];
        const auto it = index.find(r.node);
        if (it == index.end())
            throw InvalidArgument("scheduler/order", "order references unknown node " +
                                                         std::to_string(r.node));
        const int n = it->second;
        if (r.member != next_member[static_cast<std::size_t>(n)])
            throw InvalidArgument("scheduler/order",
                                  "group members of node " + std::to_string(r.node) +
                                      " must appear once each, in internal order");
        ++next_member[static_cast<std::size_t>(n)];
        const int e = x.first_of_node[static_cast<std::size_t>(n)] + r.member;

        int raw_ready = 1;
        for (int p : x.producers[static_cast<std::size_t>(e)]) {
            if (!scheduled[static_cast<std::size_t>(p)])
                throw InvalidArgument("scheduler/order",
                                      "order violates a dependence into node " +
                                          std::to_string(r.node));
            raw_ready = std::max(raw_ready, completion[static_cast<std::size_t>(p)]);
        }

        const int lat = x.latency[static_cast<std::size_t>(e)];
        const int pipe = x.pipe[static_cast<std::size_t>(e)];
        const int t = place_instr(pipes, model.global_writeback, pipe, lat, raw_ready);
        scheduled[static_cast<std::size_t>(e)] = true;
        completion[static_cast<std::size_t>(e)] = t + lat;
        s.issue_cycle[pos] = t;
        s.pipeline[pos] = static_cast<Pipeline>(pipe);
        s.makespan = std::max(s.makespan, t + lat);
    }
    return s;
}

namespace {

struct SearchState {
    std::vector<std::uint8_t> counts; // scheduled members per node
    int last[2] = {0, 0};
    std::vector<int> comp[2];   // pending completions, pruned + sorted
    std::vector<int> release;   // completion per expanded instr (0 = none/dead)
    int g = 0;                  // max completion so far
    int scheduled = 0;
    int parent = -1;
    InstrRef chosen{};
};

// Drops information that can no longer influence any future placement, so
// time-shifted twins collapse to one key.
void normalize(SearchState& st, bool global_wb) {
    const int floor_both = std::min(st.last[0], st.last[1]);
    for (int p = 0; p < 2; ++p) {
        const int threshold = (global_wb ? floor_both : st.last[p]) + 2;
        auto& v = st.comp[p];
        v.erase(std::remove_if(v.begin(), v.end(), [&](int c) { return c < threshold; }), v.end());
        std::sort(v.begin(), v.end());
    }
    for (auto& r : st.release)
        if (r != 0 && r <= floor_both + 1) r = 0;
}

std::string state_key(const SearchState& st) {
    const int base = std::min(st.last[0], st.last[1]);
    std::string k;
    k.reserve(st.counts.size() + 64);
    k.append(reinterpret_cast<const char*>(st.counts.data()), st.counts.size());
    const auto put = [&](int v) {
        const auto u = static_cast<std::uint32_t>(v);
        k.push_back(static_cast<char>(u & 0xff));
        k.push_back(static_cast<char>((u >> 8) & 0xff));
    };
    put(st.last[0] - base);
    put(st.last[1] - base);
    for (int p = 0; p < 2; ++p) {
        put(static_cast<int>(st.comp[p].size()));
        for (int c : st.comp[p]) put(c - base);
    }
    for (int r : st.release) put(r == 0 ? 0 : r - base);
    put(st.g - base);
    return k;
}

int admissible_bound(const SearchState& st, const Expanded& x) {
    int rem[2] = {0, 0};
    int minlat[2] = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    for (int e = 0; e < x.total; ++e) {
        const int n = x.node_index[static_cast<std::size_t>(e)];
        if (x.member[static_cast<std::size_t>(e)] >=
            static_cast<int>(st.counts[static_cast<std::size_t>(n)])) {
            const int p = x.pipe[static_cast<std::size_t>(e)];
            ++rem[p];
            minlat[p] = std::min(minlat[p], x.latency[static_cast<std::size_t>(e)]);
        }
    }
    int f = st.g;
    for (int p = 0; p < 2; ++p)
        if (rem[p] > 0) f = std::max(f, st.last[p] + rem[p] + minlat[p]);
    return f;
}

Schedule reconstruct(const InstructionDAG& dag, const SchedulerModel& model,
                     const std::vector<SearchState>& arena, int goal) {
    std::vector<InstrRef> order;
    for (int i = goal; arena[static_cast<std::size_t>(i)].parent >= 0;
         i = arena[static_cast<std::size_t>(i)].parent)
        order.push_back(arena[static_cast<std::size_t>(i)].chosen);
    std::reverse(order.begin(), order.end());
    return simulate(dag, order, model);
}

} // namespace

Schedule astar_schedule(const InstructionDAG& dag, const SchedulerModel& model) {
    const Expanded x = expand(dag);
    if (x.total == 0) return Schedule{};

    std::vector<SearchState> arena;
    arena.reserve(1024);
    SearchState init;
    init.counts.assign(dag.nodes.size(), 0);
    init.release.assign(static_cast<std::size_t>(x.total), 0);
    arena.push_back(std::move(init));

    // (f, -scheduled, arena index): ties prefer deeper states.
    using QEntry = std::tuple<int, int, int>;
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> open;
    open.emplace(admissible_bound(arena[0], x), 0, 0);

    std::unordered_map<std::string, int> best_base;
    best_base.emplace(state_key(arena[0]), 0);

    while (!open.empty()) {
        const auto [f, neg_sched, si] = open.top();
        open.pop();
        const SearchState st = arena[static_cast<std::size_t>(si)]; // copy: arena may grow

        if (st.scheduled == x.total) return reconstruct(dag, model, arena, si);

        {
            const int base = std::min(st.last[0], st.last[1]);
            const auto it = best_base.find(state_key(st));
            if (it != best_base.end() && it->second < base) continue; // stale entry
        }

        for (std::size_t n = 0; n < dag.nodes.size(); ++n) {
            const int m = st.counts[n];
            if (m >= x.group_of_node[n]) continue;
            const int e = x.first_of_node[n] + m;

            int raw_ready = 1;
            bool ready = true;
            for (int p : x.producers[static_cast<std::size_t>(e)]) {
                const int pn = x.node_index[static_cast<std::size_t>(p)];
                if (x.member[static_cast<std::size_t>(p)] >=
                    static_cast<int>(st.counts[static_cast<std::size_t>(pn)])) {
                    ready = false;
                    break;
                }
                raw_ready = std::max(raw_ready, st.release[static_cast<std::size_t>(p)]);
            }
            if (!ready) continue;

            SearchState next = st;
            next.parent = si;
            next.chosen = {dag.nodes[n].id, m};
            PipeState pipes[2];
            pipes[0] = {next.last[0], std::move(next.comp[0])};
            pipes[1] = {next.last[1], std::move(next.comp[1])};
            const int lat = x.latency[static_cast<std::size_t>(e)];
            const int pipe = x.pipe[static_cast<std::size_t>(e)];
            const int t = place_instr(pipes, model.global_writeback, pipe, lat, raw_ready);
            next.last[0] = pipes[0].last_issue;
            next.last[1] = pipes[1].last_issue;
            next.comp[0] = std::move(pipes[0].completions);
            next.comp[1] = std::move(pipes[1].completions);
            next.release[static_cast<std::size_t>(e)] =
                x.consumers[static_cast<std::size_t>(e)].empty() ? 0 : t + lat;
            next.counts[n] = static_cast<std::uint8_t>(m + 1);
            next.g = std::max(next.g, t + lat);
            next.scheduled = st.scheduled + 1;
            normalize(next, model.global_writeback);

            const int nbase = std::min(next.last[0], next.last[1]);
            const std::string key = state_key(next);
            const auto it = best_base.find(key);
            if (it != best_base.end() && it->second <= nbase) continue;
            best_base[key] = nbase;

            const int nf = admissible_bound(next, x);
            arena.push_back(std::move(next));
            if (arena.size() > kStateBudget)
                throw ResourceError("scheduler/resource",
                                    "search state budget exceeded; merge more work into groups");
            open.emplace(nf, -arena.back().scheduled, static_cast<int>(arena.size() - 1));
        }
    }
    throw Error("scheduler/cycle", "no complete schedule exists (unsatisfiable dependencies)");
}

Schedule brute_force_schedule(const InstructionDAG& dag, const SchedulerModel& model) {
    const Expanded x = expand(dag);
    if (x.total > 9)
        throw InvalidArgument("scheduler/range",
                              "brute force limited to 9 expanded instructions");
    if (x.total == 0) return Schedule{};

    std::vector<int> counts(dag.nodes.size(), 0);
    std::vector<int> completion(static_cast<std::size_t>(x.total), 0);
    std::vector<InstrRef> order, best_order;
    int best = std::numeric_limits<int>::max();

    PipeState pipes[2];
    auto rec = [&](auto&& self, int depth, int makespan) -> void {
        if (makespan >= best) return; // placements only grow the makespan
        if (depth == x.total) {
            best = makespan;
            best_order = order;
            return;
        }
        for (std::size_t n = 0; n < dag.nodes.size(); ++n) {
            const int m = counts[n];
            if (m >= x.group_of_node[n]) continue;
            const int e = x.first_of_node[n] + m;
            int raw_ready = 1;
            bool ready = true;
            for (int p : x.producers[static_cast<std::size_t>(e)]) {
                const int pn = x.node_index[static_cast<std::size_t>(p)];
                if (x.member[static_cast<std::size_t>(p)] >= counts[static_cast<std::size_t>(pn)]) {
                    ready = false;
                    break;
                }
                raw_ready = std::max(raw_ready, completion[static_cast<std::size_t>(p)]);
            }
            if (!ready) continue;

            const PipeState saved[2] = {pipes[0], pipes[1]};
            const int lat = x.latency[static_cast<std::size_t>(e)];
            const int pipe = x.pipe[static_cast<std::size_t>(e)];
            const int t = place_instr(pipes, model.global_writeback, pipe, lat, raw_ready);
            counts[n] = m + 1;
            completion[static_cast<std::size_t>(e)] = t + lat;
            order.push_back({dag.nodes[n].id, m});

            self(self, depth + 1, std::max(makespan, t + lat));

            order.pop_back();
            completion[static_cast<std::size_t>(e)] = 0;
            counts[n] = m;
            pipes[0] = saved[0];
            pipes[1] = saved[1];
        }
    };
    rec(rec, 0, 0);
    return simulate(dag, best_order, model);
}

InstructionDAG expand_dag(const InstructionDAG& dag) {
    const auto index = validate_dag(dag);
    const Expanded x = expand(dag);
    InstructionDAG out;
    out.nodes.reserve(static_cast<std::size_t>(x.total));
    for (int e = 0; e < x.total; ++e) {
        const auto& n = dag.nodes[static_cast<std::size_t>(x.node_index[static_cast<std::size_t>(e)])];
        out.nodes.push_back({e, n.latency, n.pipeline, 1});
    }
    for (int e = 0; e < x.total; ++e)
        for (int p : x.producers[static_cast<std::size_t>(e)]) out.edges.push_back({p, e});
    (void)index;
    return out;
}

InstructionDAG load_dag(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    const auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("scheduler/parse", "empty DAG text", 1);
    int n = 0, m = 0;
    if (std::sscanf(line.c_str(), "nodes %d edges %d", &n, &m) != 2 || n < 0 || m < 0)
        throw ParseError("scheduler/parse", "expected header 'nodes <n> edges <m>'", lineno);

    InstructionDAG dag;
    dag.nodes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (!next_line())
            throw ParseError("scheduler/parse", "missing node line", lineno + 1);
        std::istringstream ls(line);
        InstructionNode node;
        std::string tag;
        int lat = 0, gc = 0;
        if (!(ls >> node.id >> lat >> tag >> gc))
            throw ParseError("scheduler/parse", "expected 'id latency pipeline group_count'",
                             lineno);
        if (tag == "P0") node.pipeline = Pipeline::P0;
        else if (tag == "P1") node.pipeline = Pipeline::P1;
        else
            throw ParseError("scheduler/pipeline", "unknown pipeline tag '" + tag + "'", lineno);
        if (lat < 1) throw ParseError("scheduler/field", "latency must be >= 1", lineno);
        if (gc < 1) throw ParseError("scheduler/field", "group_count must be >= 1", lineno);
        node.latency = lat;
        node.group_count = gc;
        dag.nodes.push_back(node);
    }
    for (int i = 0; i < m; ++i) {
        if (!next_line())
            throw ParseError("scheduler/parse", "missing edge line", lineno + 1);
        DagEdge e;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%d %d %c", &e.from, &e.to, &extra) != 2)
            throw ParseError("scheduler/parse", "expected 'from to'", lineno);
        dag.edges.push_back(e);
    }
    if (next_line())
        throw ParseError("scheduler/parse", "unexpected trailing content", lineno);

    validate_dag(dag); // structured errors for duplicates, bad edges, cycles
    return dag;
}

std::string emit_dag(const InstructionDAG& dag) {
    InstructionDAG d = dag;
    std::sort(d.nodes.begin(), d.nodes.end(),
              [](const InstructionNode& a, const InstructionNode& b) { return a.id < b.id; });
    std::sort(d.edges.begin(), d.edges.end(), [](const DagEdge& a, const DagEdge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    std::string out = "nodes " + std::to_string(d.nodes.size()) + " edges " +
                      std::to_string(d.edges.size()) + "\n";
    for (const auto& n : d.nodes)
        out += std::to_string(n.id) + " " + std::to_string(n.latency) +
               (n.pipeline == Pipeline::P0 ? " P0 " : " P1 ") + std::to_string(n.group_count) +
               "\n";
    for (const auto& e : d.edges)
        out += std::to_string(e.from) + " " + std::to_string(e.to) + "\n";
    return out;
}

std::string report(const Schedule& s, const InstructionDAG& dag) {
    std::unordered_map<int, int> latency;
    for (const auto& n : dag.nodes) latency[n.id] = n.latency;
    std::string out;
    for (std::size_t i = 0; i < s.order.size(); ++i) {
        const auto& r = s.order[i];
        const int lat = latency.at(r.node);
        out += "issue " + std::to_string(s.issue_cycle[i]) + " pipe " +
               (s.pipeline[i] == Pipeline::P0 ? std::string("P0") : std::string("P1")) +
               " node " + std::to_string(r.node) + "[" + std::to_string(r.member) + "]" +
               " completes " + std::to_string(s.issue_cycle[i] + lat) + "\n";
    }
    out += "makespan " + std::to_string(s.makespan) + "\n";
    return out;
}

} // namespace torfp
