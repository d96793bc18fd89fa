#pragma once

#include "rtsched/config.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"
#include "rtsched/scheduler.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace rtsched {

// A self-contained small scheduling instance for oracle comparisons.
// Hard caps: <= 4 machines, <= 6 courses, <= 12 working days in the
// horizon, <= 6 fractions per course.
struct OracleInstance {
    MachinePark park;
    CalendarConfig calendar_config;
    std::shared_ptr<WorkingCalendar> calendar;
    ProtocolTable protocols;
    CourseTable courses;
    ObjectiveWeights weights;
    SolverParams params;
    PreferenceModel preferences;
    Date today;
    Date horizon_end;

    void check_size_caps() const; // throws SizeError
};

// Deterministic random instance for a seed; capacity pressure varies with
// the draw so some instances are contested and a few infeasible.
OracleInstance make_oracle_instance(std::uint64_t seed);

struct OracleVerdict {
    bool feasible = false;
    std::int64_t cost = 0;
    long nodes = 0;
};

// Provably minimum-cost joint selection over the instance's plan space
// (exhaustive search). Throws SizeError above the caps.
OracleVerdict brute_force_oracle(const OracleInstance& instance);

struct HeuristicVerdict {
    bool feasible = false; // every course scheduled
    std::int64_t cost = 0;
    int deferred = 0;
};

// solve_batch run on the instance, reported in oracle-comparable terms.
HeuristicVerdict heuristic_on_instance(const OracleInstance& instance);

struct OracleComparison {
    std::uint64_t seed = 0;
    bool oracle_feasible = false;
    bool heuristic_feasible = false;
    std::int64_t oracle_cost = 0;
    std::int64_t heuristic_cost = 0;
    double ratio = 1.0; // heuristic / oracle on feasible instances
};

OracleComparison compare_on_instance(std::uint64_t seed);

} // namespace rtsched
