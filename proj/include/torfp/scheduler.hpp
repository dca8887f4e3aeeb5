#ifndef TORFP_SCHEDULER_HPP
#define TORFP_SCHEDULER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "torfp/errors.hpp"

namespace torfp {

enum class Pipeline : int { P0 = 0, P1 = 1 };

// One DAG node: a run of group_count symmetric instructions with a fixed
// internal order, all with the same latency on the same pipeline.
struct InstructionNode {
    int id = 0;
    int latency = 1;
    Pipeline pipeline = Pipeline::P0;
    int group_count = 1;
};

struct DagEdge {
    int from = 0;
    int to = 0;
};

// Edge from -> to means `to` has a data dependence on `from`. Between
// groups of equal size the dependence is member-wise (a[i] -> b[i]);
// between unequal sizes it is all-pairs.
struct InstructionDAG {
    std::vector<InstructionNode> nodes;
    std::vector<DagEdge> edges;
};

// Machine model switches. The writeback port conflict is per-pipeline by
// default; global treats both pipelines as sharing one port.
struct SchedulerModel {
    bool global_writeback = false;
};

// Member `member` of node `node` (0-based within the group).
struct InstrRef {
    int node = 0;
    int member = 0;

    bool operator==(const InstrRef&) const = default;
};

struct Schedule {
    std::vector<InstrRef> order;      // issue order, groups in internal order
    std::vector<int> issue_cycle;     // parallel to order, 1-based cycles
    std::vector<Pipeline> pipeline;   // parallel to order
    int makespan = 0;                 // last completion cycle
};

// In-order dual-pipeline simulation of a fixed issue order. Each
// instruction issues at the earliest cycle t with: t past the previous
// issue on its pipeline, t at or past every producer's completion (RAW),
// and no same-port completion already landing on t + latency (writeback;
// a conflict bumps t by one and re-checks). Throws InvalidArgument when
// the order is not a dependency-respecting permutation.
Schedule simulate(const InstructionDAG& dag, const std::vector<InstrRef>& order,
                  const SchedulerModel& model = {});

// Minimum-makespan schedule under simulate's model, by A* over prefixes
// with an admissible per-pipeline completion bound. Group members keep
// their internal order. Throws ResourceError when the DAG expands past
// the instruction limit (64) or the search exceeds its state budget.
Schedule astar_schedule(const InstructionDAG& dag, const SchedulerModel& model = {});

// Exhaustive optimum over all dependency-respecting issue orders;
// restricted to at most 9 expanded instructions.
Schedule brute_force_schedule(const InstructionDAG& dag, const SchedulerModel& model = {});

// Singleton-node DAG equivalent to `dag` but WITHOUT the fixed internal
// member order: each member becomes its own node (ids renumbered densely,
// member-major), dependence edges expanded member-wise or all-pairs. The
// search over this DAG ranges over all member interleavings.
InstructionDAG expand_dag(const InstructionDAG& dag);

// Text format: header "nodes <n> edges <m>", then one "id latency
// pipeline group_count" line per node, then one "from to" line per edge.
InstructionDAG load_dag(const std::string& text);
std::string emit_dag(const InstructionDAG& dag); // canonical: sorted nodes and edges

std::string report(const Schedule& s, const InstructionDAG& dag);

} // namespace torfp

#endif
