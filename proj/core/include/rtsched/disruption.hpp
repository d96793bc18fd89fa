#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/ingest.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"
#include "rtsched/schedule.hpp"

#include <string>
#include <vector>

namespace rtsched {

enum class RepairRule {
    complete_same_day, // (1) completely beam-matched machine, same day
    partial_same_day,  // (2) partially matched machine, same day
    postpone_append,   // (3a) extra treatment day after the course end
    postpone_double,   // (3b) second fraction on a later day, >= 6 h apart
    unrepaired
};

const char* to_string(RepairRule r);

struct Displacement {
    std::string course_id;
    int fraction = 0;
    std::string from_machine;
    Date from_date;
    int from_start = -1;
    std::string to_machine; // empty when unrepaired
    Date to_date;
    int to_start = -1;
    RepairRule rule = RepairRule::unrepaired;
};

// Morning pre-processing of one machine failure: block the interval for
// the day's batch and move every affected appointment by the first
// applicable rule. Affected appointments are handled in (priority,
// original start) order; repairs never land before the failure begins and
// never move a fraction to an earlier date. Unrepairable fractions stay in
// place and are surfaced in the log.
std::vector<Displacement> apply_failure(Schedule& schedule, const FailureEvent& event,
                                        MachinePark& park, const ProtocolTable& protocols,
                                        const CourseTable& courses, const WorkingCalendar& cal);

std::string displacement_csv(const std::vector<Displacement>& log);

} // namespace rtsched
