#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtsched {

enum class ApptStatus { tentative, communicated };

const char* to_string(ApptStatus s);
ApptStatus appt_status_from_string(const std::string& s);

// One fraction on one machine-day. start < 0 means "window assigned,
// start time pending" (only between batch solve and start-time assignment).
struct Appointment {
    std::string course_id;
    int fraction = 1; // 1-based
    std::string machine;
    Date date;
    int window = 0;
    int start = -1; // minutes from midnight
    int duration = 0;
    ApptStatus status = ApptStatus::tentative;

    Interval interval() const { return {start, start + duration}; }
};

// The evolving assignment of fractions to machine/day/window/start.
// Communicated appointments are immutable to the batch solver; only the
// disruption module may move them (logged).
class Schedule {
public:
    void add(Appointment a); // throws IntegrityError on duplicate key
    void remove(const std::string& course_id, int fraction);
    void remove_course(const std::string& course_id);
    Appointment& at(const std::string& course_id, int fraction);
    const Appointment& at(const std::string& course_id, int fraction) const;
    const Appointment* find(const std::string& course_id, int fraction) const;

    bool has_course(const std::string& course_id) const;
    // Chronological (date, start, fraction).
    std::vector<const Appointment*> course_appointments(const std::string& course_id) const;
    // Sorted by (start, course, fraction); unassigned starts last.
    std::vector<const Appointment*> day_appointments(const std::string& machine,
                                                     Date date) const;
    std::vector<std::string> course_ids() const; // sorted
    std::vector<std::pair<std::string, Date>> machine_days() const;

    std::optional<Date> first_fraction_date(const std::string& course_id) const;
    std::optional<Date> last_fraction_date(const std::string& course_id) const;

    void set_batch_day(const std::string& course_id, Date d);
    std::optional<Date> batch_day(const std::string& course_id) const;

    void freeze_course(const std::string& course_id); // all fractions at once
    bool is_communicated(const std::string& course_id) const;

    // Move one appointment (disruption repairs). Keeps status.
    void move(const std::string& course_id, int fraction, const std::string& machine, Date date,
              int window, int start);
    void set_start(const std::string& course_id, int fraction, int window, int start);

    size_t n_appointments() const { return appts_.size(); }
    bool empty() const { return appts_.empty(); }

    // Order-independent digest of the full content; validation must not
    // change it.
    std::uint64_t content_hash() const;

private:
    using Key = std::pair<std::string, int>;
    std::map<Key, Appointment> appts_;
    std::map<std::pair<std::string, Date>, std::vector<Key>> by_machine_day_;
    std::map<std::string, Date> batch_day_;
    std::map<std::string, bool> communicated_;

    void index_add(const Appointment& a);
    void index_remove(const Appointment& a);
};

// --- packing -------------------------------------------------------------

// Earliest grid-aligned start >= min_start whose [start, start+duration)
// avoids `busy` (sorted, coalesced) and ends by close. nullopt if none.
std::optional<int> find_slot(const CalendarConfig& cal, const std::vector<Interval>& busy,
                             int duration, int min_start);

struct PackItem {
    int window = 0;
    int duration = 0;
    Priority priority = Priority::C;
    std::string course_id;
    int fraction = 1;
    int assigned_start = -1; // output
};

// Packs new items into one machine-day around fixed busy time, earliest
// first in the stable order (window, priority, course_id, fraction). Each
// start must fall inside the item's window; runs may spill past the window
// boundary but never past closing. `non_a_blocks` is extra busy time that
// only non-priority-A items must avoid (static reservation). Returns false
// when any item cannot be placed (inputs untouched in that case except
// assigned_start scratch).
bool pack_day(const CalendarConfig& cal, std::vector<Interval> busy, std::vector<PackItem>& items,
              const std::vector<Interval>& non_a_blocks = {});

} // namespace rtsched
