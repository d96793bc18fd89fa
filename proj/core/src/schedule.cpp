#include "rtsched/schedule.hpp"

#include "rtsched/errors.hpp"

#include <algorithm>

namespace rtsched {

const char* to_string(ApptStatus s) {
    return s == ApptStatus::tentative ? "tentative" : "communicated";
}

ApptStatus appt_status_from_string(const std::string& s) {
    if (s == "tentative") return ApptStatus::tentative;
    if (s == "communicated") return ApptStatus::communicated;
    throw ParseError("unknown appointment status '" + s + "'");
}

void Schedule::add(Appointment a) {
    Key key{a.course_id, a.fraction};
    if (appts_.count(key))
        throw IntegrityError("duplicate appointment " + a.course_id + "#" +
                             std::to_string(a.fraction));
    index_add(a);
    appts_.emplace(std::move(key), std::move(a));
}

void Schedule::remove(const std::string& course_id, int fraction) {
    auto it = appts_.find({course_id, fraction});
    if (it == appts_.end()) return;
    index_remove(it->second);
    appts_.erase(it);
}

void Schedule::remove_course(const std::string& course_id) {
    auto it = appts_.lower_bound({course_id, 0});
    while (it != appts_.end() && it->first.first == course_id) {
        index_remove(it->second);
        it = appts_.erase(it);
    }
    batch_day_.erase(course_id);
    communicated_.erase(course_id);
}

Appointment& Schedule::at(const std::string& course_id, int fraction) {
    auto it = appts_.find({course_id, fraction});
    if (it == appts_.end())
        throw ReferenceError("no appointment " + course_id + "#" + std::to_string(fraction));
    return it->second;
}

const Appointment& Schedule::at(const std::string& course_id, int fraction) const {
    return const_cast<Schedule*>(this)->at(course_id, fraction);
}

const Appointment* Schedule::find(const std::string& course_id, int fraction) const {
    auto it = appts_.find({course_id, fraction});
    return it == appts_.end() ? nullptr : &it->second;
}

bool Schedule::has_course(const std::string& course_id) const {
    auto it = appts_.lower_bound({course_id, 0});
    return it != appts_.end() && it->first.first == course_id;
}

std::vector<const Appointment*>
Schedule::course_appointments(const std::string& course_id) const {
    std::vector<const Appointment*> out;
    for (auto it = appts_.lower_bound({course_id, 0});
         it != appts_.end() && it->first.first == course_id; ++it)
        out.push_back(&it->second);
    std::sort(out.begin(), out.end(), [](const Appointment* a, const Appointment* b) {
        return std::tuple(a->date, a->start, a->fraction) <
               std::tuple(b->date, b->start, b->fraction);
    });
    return out;
}

std::vector<const Appointment*> Schedule::day_appointments(const std::string& machine,
                                                           Date date) const {
    std::vector<const Appointment*> out;
    auto it = by_machine_day_.find({machine, date});
    if (it == by_machine_day_.end()) return out;
    for (const Key& k : it->second) out.push_back(&appts_.at(k));
    std::sort(out.begin(), out.end(), [](const Appointment* a, const Appointment* b) {
        const int sa = a->start < 0 ? 1 << 20 : a->start;
        const int sb = b->start < 0 ? 1 << 20 : b->start;
        return std::tuple(sa, a->course_id, a->fraction) <
               std::tuple(sb, b->course_id, b->fraction);
    });
    return out;
}

std::vector<std::string> Schedule::course_ids() const {
    std::vector<std::string> out;
    for (const auto& [key, a] : appts_)
        if (out.empty() || out.back() != key.first) out.push_back(key.first);
    return out;
}

std::vector<std::pair<std::string, Date>> Schedule::machine_days() const {
    std::vector<std::pair<std::string, Date>> out;
    for (const auto& [key, list] : by_machine_day_)
        if (!list.empty()) out.push_back(key);
    return out;
}

std::optional<Date> Schedule::first_fraction_date(const std::string& course_id) const {
    auto appts = course_appointments(course_id);
    if (appts.empty()) return std::nullopt;
    return appts.front()->date;
}

std::optional<Date> Schedule::last_fraction_date(const std::string& course_id) const {
    auto appts = course_appointments(course_id);
    if (appts.empty()) return std::nullopt;
    return appts.back()->date;
}

void Schedule::set_batch_day(const std::string& course_id, Date d) {
    batch_day_[course_id] = d;
}

std::optional<Date> Schedule::batch_day(const std::string& course_id) const {
    auto it = batch_day_.find(course_id);
    if (it == batch_day_.end()) return std::nullopt;
    return it->second;
}

void Schedule::freeze_course(const std::string& course_id) {
    communicated_[course_id] = true;
    for (auto it = appts_.lower_bound({course_id, 0});
         it != appts_.end() && it->first.first == course_id; ++it)
        it->second.status = ApptStatus::communicated;
}

bool Schedule::is_communicated(const std::string& course_id) const {
    auto it = communicated_.find(course_id);
    return it != communicated_.end() && it->second;
}

void Schedule::move(const std::string& course_id, int fraction, const std::string& machine,
                    Date date, int window, int start) {
    Appointment& a = at(course_id, fraction);
    index_remove(a);
    a.machine = machine;
    a.date = date;
    a.window = window;
    a.start = start;
    index_add(a);
}

void Schedule::set_start(const std::string& course_id, int fraction, int window, int start) {
    Appointment& a = at(course_id, fraction);
    a.window = window;
    a.start = start;
}

std::uint64_t Schedule::content_hash() const {
    auto mix = [](std::uint64_t h, std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    };
    auto hash_str = [](const std::string& s) {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    };
    std::uint64_t h = 0;
    for (const auto& [key, a] : appts_) {
        std::uint64_t x = hash_str(a.course_id);
        x = mix(x, static_cast<std::uint64_t>(a.fraction));
        x = mix(x, hash_str(a.machine));
        x = mix(x, static_cast<std::uint64_t>(static_cast<std::int64_t>(a.date.days())));
        x = mix(x, static_cast<std::uint64_t>(a.window));
        x = mix(x, static_cast<std::uint64_t>(a.start + 1));
        x = mix(x, static_cast<std::uint64_t>(a.duration));
        x = mix(x, a.status == ApptStatus::communicated ? 2u : 1u);
        h = mix(h, x);
    }
    for (const auto& [course, d] : batch_day_)
        h = mix(h, mix(hash_str(course), static_cast<std::uint64_t>(d.days())));
    for (const auto& [course, c] : communicated_)
        h = mix(h, mix(hash_str(course), c ? 1u : 0u));
    return h;
}

void Schedule::index_add(const Appointment& a) {
    by_machine_day_[{a.machine, a.date}].push_back({a.course_id, a.fraction});
}

void Schedule::index_remove(const Appointment& a) {
    auto it = by_machine_day_.find({a.machine, a.date});
    if (it == by_machine_day_.end()) return;
    auto& list = it->second;
    list.erase(std::remove(list.begin(), list.end(), Key{a.course_id, a.fraction}), list.end());
    if (list.empty()) by_machine_day_.erase(it);
}

std::optional<int> find_slot(const CalendarConfig& cal, const std::vector<Interval>& busy,
                             int duration, int min_start) {
    const int grid = cal.time_grid;
    auto round_up = [grid](int t) { return ((t + grid - 1) / grid) * grid; };
    int t = round_up(std::max(cal.open_minute, min_start));
    while (t + duration <= cal.close_minute) {
        const Interval cand{t, t + duration};
        const Interval* hit = nullptr;
        for (const Interval& iv : busy) {
            if (iv.overlaps(cand)) {
                hit = &iv;
                break;
            }
            if (iv.begin >= cand.end) break;
        }
        if (!hit) return t;
        t = round_up(hit->end);
    }
    return std::nullopt;
}

bool pack_day(const CalendarConfig& cal, std::vector<Interval> busy, std::vector<PackItem>& items,
              const std::vector<Interval>& non_a_blocks) {
    busy = merge_intervals(std::move(busy));
    std::vector<PackItem*> order;
    order.reserve(items.size());
    for (auto& it : items) order.push_back(&it);
    std::stable_sort(order.begin(), order.end(), [](const PackItem* a, const PackItem* b) {
        return std::tuple(a->window, static_cast<int>(a->priority), a->course_id, a->fraction) <
               std::tuple(b->window, static_cast<int>(b->priority), b->course_id, b->fraction);
    });
    for (PackItem* item : order) {
        std::optional<int> start;
        if (item->priority != Priority::A && !non_a_blocks.empty()) {
            std::vector<Interval> guarded = busy;
            guarded.insert(guarded.end(), non_a_blocks.begin(), non_a_blocks.end());
            start = find_slot(cal, merge_intervals(std::move(guarded)), item->duration,
                              cal.window_begin(item->window));
        } else {
            start = find_slot(cal, busy, item->duration, cal.window_begin(item->window));
        }
        if (!start || *start >= cal.window_end(item->window)) return false;
        item->assigned_start = *start;
        const Interval placed{*start, *start + item->duration};
        busy.insert(std::upper_bound(busy.begin(), busy.end(), placed), placed);
    }
    return true;
}

} // namespace rtsched
