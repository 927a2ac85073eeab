#include "primo/study.hpp"

#include "primo/errors.hpp"
#include "primo/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace primo {

using ordered_json = nlohmann::ordered_json;

//---------------------------------------------------------------------------//
// Event log serialization
//---------------------------------------------------------------------------//

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ordered_json vec_json(Vec3 v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const ordered_json& j, std::size_t index, const char* field) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw ReplayError(std::string("entry ") + std::to_string(index) + ": '" + field + "' must be [x,y,z]", index);
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const ordered_json& field(const ordered_json& data, const char* name, std::size_t index) {
    const auto it = data.find(name);
    if (it == data.end()) {
        throw ReplayError("entry " + std::to_string(index) + ": missing data field '" + name + "'", index);
    }
    return *it;
}

double number(const ordered_json& j, const char* name, std::size_t index) {
    const ordered_json& v = field(j, name, index);
    if (!v.is_number()) throw ReplayError("entry " + std::to_string(index) + ": '" + name + "' must be a number", index);
    return v.get<double>();
}

int integer(const ordered_json& j, const char* name, std::size_t index) {
    const ordered_json& v = field(j, name, index);
    if (!v.is_number_integer()) {
        throw ReplayError("entry " + std::to_string(index) + ": '" + name + "' must be an integer", index);
    }
    return v.get<int>();
}

std::string text(const ordered_json& j, const char* name, std::size_t index) {
    const ordered_json& v = field(j, name, index);
    if (!v.is_string()) throw ReplayError("entry " + std::to_string(index) + ": '" + name + "' must be a string", index);
    return v.get<std::string>();
}

ordered_json event_data(const Event& e) {
    return std::visit(overloaded{
                          [](const AimEvent& a) {
                              return ordered_json{{"origin", vec_json(a.ray.origin)}, {"dir", vec_json(a.ray.direction)}};
                          },
                          [](const ConfirmEvent&) { return ordered_json::object(); },
                          [](const AscendEvent&) { return ordered_json::object(); },
                          [](const ClipEvent& c) { return ordered_json{{"h", c.height}}; },
                          [](const TickEvent& t) { return ordered_json{{"dt_ms", t.dt_ms}}; },
                          [](const GateEvent& g) { return ordered_json{{"defect", g.defect}}; },
                          [](const RevealEvent& r) { return ordered_json{{"defect", r.defect}}; },
                          [](const AnswerEvent& a) { return ordered_json{{"question", a.question}, {"choice", a.choice}}; },
                          [](const RejectEvent& r) { return ordered_json{{"event", r.event}, {"reason", r.reason}}; },
                      },
                      e);
}

}  // namespace

std::string_view event_name(const Event& e) {
    static constexpr std::array<std::string_view, 9> names{"aim",  "confirm", "ascend", "clip",  "tick",
                                                           "gate", "reveal",  "answer", "reject"};
    return names[e.index()];
}

std::string to_jsonl_line(const LogEntry& entry) {
    ordered_json j;
    j["t"] = entry.t_ms;
    j["e"] = event_name(entry.event);
    j["data"] = event_data(entry.event);
    return j.dump();
}

std::string to_jsonl(const EventLog& log) {
    std::string out;
    for (const auto& entry : log.entries) {
        out += to_jsonl_line(entry);
        out += '\n';
    }
    return out;
}

LogEntry parse_jsonl_line(std::string_view line, std::size_t index) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ReplayError("entry " + std::to_string(index) + ": invalid JSON (" + e.what() + ")", index);
    }
    if (!j.is_object()) throw ReplayError("entry " + std::to_string(index) + ": not an object", index);
    const ordered_json& t = field(j, "t", index);
    if (!t.is_number_integer()) throw ReplayError("entry " + std::to_string(index) + ": 't' must be integer ms", index);
    const std::string name = text(j, "e", index);
    const auto data_it = j.find("data");
    const ordered_json data = data_it == j.end() ? ordered_json::object() : *data_it;
    if (!data.is_object()) throw ReplayError("entry " + std::to_string(index) + ": 'data' must be an object", index);

    LogEntry entry;
    entry.t_ms = t.get<std::int64_t>();
    if (name == "aim") {
        try {
            entry.event = AimEvent{Ray::make(vec_from(field(data, "origin", index), index, "origin"),
                                             vec_from(field(data, "dir", index), index, "dir"))};
        } catch (const ContractError& e) {
            throw ReplayError("entry " + std::to_string(index) + ": " + e.what(), index);
        }
    } else if (name == "confirm") {
        entry.event = ConfirmEvent{};
    } else if (name == "ascend") {
        entry.event = AscendEvent{};
    } else if (name == "clip") {
        entry.event = ClipEvent{number(data, "h", index)};
    } else if (name == "tick") {
        entry.event = TickEvent{number(data, "dt_ms", index)};
    } else if (name == "gate") {
        entry.event = GateEvent{integer(data, "defect", index)};
    } else if (name == "reveal") {
        entry.event = RevealEvent{integer(data, "defect", index)};
    } else if (name == "answer") {
        entry.event = AnswerEvent{text(data, "question", index), integer(data, "choice", index)};
    } else if (name == "reject") {
        entry.event = RejectEvent{text(data, "event", index), text(data, "reason", index)};
    } else {
        throw ReplayError("entry " + std::to_string(index) + ": unknown event '" + name + "'", index);
    }
    return entry;
}

EventLog parse_jsonl(std::string_view text, const JsonlOptions& options) {
    EventLog log;
    std::size_t pos = 0;
    std::size_t index = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const bool last = nl == std::string_view::npos;
        std::string_view line = text.substr(pos, last ? std::string_view::npos : nl - pos);
        pos = last ? text.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            log.entries.push_back(parse_jsonl_line(line, index));
        } catch (const ReplayError&) {
            if (last && options.tolerate_truncated_tail && !ordered_json::accept(line)) break;
            throw;
        }
        ++index;
    }
    return log;
}

//---------------------------------------------------------------------------//
// Questions
//---------------------------------------------------------------------------//

namespace {

std::uint64_t path_to_cell(const OctPath& path) {
    std::uint64_t cell = 0;
    for (OctantIndex o : path) cell = (cell << 3) | static_cast<std::uint64_t>(o.value());
    return cell;
}

OctPath cell_to_path(std::uint64_t cell, int depth) {
    OctPath path(static_cast<std::size_t>(depth));
    for (int level = depth - 1; level >= 0; --level) {
        path[static_cast<std::size_t>(level)] = OctantIndex(static_cast<int>(cell & 7u));
        cell >>= 3;
    }
    return path;
}

Vec3 cell_center(std::uint64_t cell, int depth) { return path_to_aabb(Aabb::unit(), cell_to_path(cell, depth)).center(); }

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[rng.below(i)]);
    }
}

Question assemble(QuestionKind kind, std::vector<Vec3> correct, std::vector<std::vector<Vec3>> distractors, Rng& rng) {
    std::vector<int> order{0, 1, 2, 3};
    shuffle(order, rng);
    Question q;
    q.kind = kind;
    for (int slot = 0; slot < 4; ++slot) {
        const int source = order[static_cast<std::size_t>(slot)];
        if (source == 0) {
            q.choices[slot] = correct;
            q.correct_index = slot;
        } else {
            q.choices[slot] = distractors[static_cast<std::size_t>(source - 1)];
        }
    }
    return q;
}

}  // namespace

Question make_q1(const NavState& state, std::uint64_t seed) {
    const int depth = state.depth();
    if (depth < 1) throw DomainError("make_q1: the focus is at the top level");
    if (depth > 20) throw ContractError("make_q1: depth too large");

    Rng rng(seed);
    const Vec3 focus_center = state.focus().center();
    const std::uint64_t own = path_to_cell(locate_point(Aabb::unit(), depth, focus_center));
    const int top_shift = 3 * (depth - 1);
    const std::uint64_t own_top = own >> top_shift;
    const std::uint64_t cells_below_top = std::uint64_t{1} << top_shift;

    // Mirror across a principal plane: complement that axis' bit on every level.
    const int axis = static_cast<int>(rng.below(3));
    std::uint64_t mirror_mask = 0;
    for (int level = 0; level < depth; ++level) mirror_mask |= std::uint64_t{1} << (3 * level + axis);
    const std::uint64_t mirrored = own ^ mirror_mask;

    std::uint64_t same_octant;
    if (depth == 1) {
        // One cell per top-level octant: use a face neighbour across another axis.
        const int other_axis = (axis + 1 + static_cast<int>(rng.below(2))) % 3;
        same_octant = own ^ (std::uint64_t{1} << other_axis);
    } else {
        do {
            same_octant = (own_top << top_shift) | rng.below(cells_below_top);
        } while (same_octant == own);
    }

    std::uint64_t other_octant;
    do {
        other_octant = rng.below(std::uint64_t{1} << (3 * depth));
    } while ((other_octant >> top_shift) == own_top || other_octant == mirrored || other_octant == same_octant);

    return assemble(QuestionKind::Q1Location, {focus_center},
                    {{cell_center(mirrored, depth)}, {cell_center(same_octant, depth)}, {cell_center(other_octant, depth)}},
                    rng);
}

Question make_q2(const std::vector<DefectRegion>& defects, std::uint64_t seed) {
    if (defects.size() != 4) throw DomainError("make_q2: exactly 4 defects required, got " + std::to_string(defects.size()));
    for (const auto& d : defects) {
        if (d.cell_path.empty() || d.cell_path.size() > 20) throw DomainError("make_q2: defects need a cell depth in [1,20]");
    }

    Rng rng(seed);
    std::vector<Vec3> truth;
    std::vector<std::uint64_t> true_cells;
    for (const auto& d : defects) {
        truth.push_back(d.center);
        true_cells.push_back(path_to_cell(d.cell_path));
    }

    std::vector<std::vector<Vec3>> distractors;
    while (distractors.size() < 3) {
        std::vector<int> positions{0, 1, 2, 3};
        shuffle(positions, rng);
        const auto moved = 2 + rng.below(3);
        std::vector<Vec3> candidate = truth;
        std::vector<std::uint64_t> used = true_cells;
        for (std::uint64_t m = 0; m < moved; ++m) {
            const auto pos = static_cast<std::size_t>(positions[m]);
            const int depth = static_cast<int>(defects[pos].cell_path.size());
            std::uint64_t cell;
            do {
                cell = rng.below(std::uint64_t{1} << (3 * depth));
            } while (std::find(used.begin(), used.end(), cell) != used.end());
            used.push_back(cell);
            candidate[pos] = cell_center(cell, depth);
        }
        if (std::find(distractors.begin(), distractors.end(), candidate) == distractors.end()) {
            distractors.push_back(std::move(candidate));
        }
    }
    return assemble(QuestionKind::Q2Object, truth, distractors, rng);
}

AnswerScore score_answer(const Question& q, int picked) {
    if (picked < 0 || picked > 3) throw OutOfBoundsError("score_answer: choice must be in [0,3]");
    return {picked == q.correct_index};
}

double accuracy(const std::vector<AnswerScore>& scores) {
    if (scores.empty()) throw DomainError("accuracy: no answers");
    const auto correct = std::count_if(scores.begin(), scores.end(), [](AnswerScore s) { return s.correct; });
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

//---------------------------------------------------------------------------//
// Schedules and trials
//---------------------------------------------------------------------------//

std::vector<ParticipantSchedule> build_schedule(int n_participants) {
    if (n_participants <= 0 || n_participants % 4 != 0) {
        throw DomainError("build_schedule: participant count must be a positive multiple of 4, got " +
                          std::to_string(n_participants));
    }
    std::vector<ParticipantSchedule> schedules;
    schedules.reserve(static_cast<std::size_t>(n_participants));
    for (int p = 0; p < n_participants; ++p) {
        const int group = p % 4;
        const DisplayMode first_display = (group & 1) ? DisplayMode::Everything : DisplayMode::Selection;
        const DisplayMode second_display = (group & 1) ? DisplayMode::Selection : DisplayMode::Everything;
        const NavStyle first_style = (group & 2) ? NavStyle::Unstructured : NavStyle::Structured;
        const NavStyle second_style = (group & 2) ? NavStyle::Structured : NavStyle::Unstructured;
        schedules.push_back({p,
                             {Condition{first_display, first_style}, Condition{first_display, second_style},
                              Condition{second_display, first_style}, Condition{second_display, second_style}}});
    }
    return schedules;
}

std::vector<TrialSpec> build_trials(const ParticipantSchedule& schedule, std::uint64_t master_seed) {
    std::vector<TrialSpec> trials;
    trials.reserve(kTrialsPerParticipant);
    const auto participant = static_cast<std::uint64_t>(schedule.participant);
    for (int position = 0; position < 4; ++position) {
        const Condition condition = schedule.condition_order[static_cast<std::size_t>(position)];
        const auto code = static_cast<std::uint64_t>(condition.code());
        for (int object = 0; object <= 4; ++object) {
            const auto obj = static_cast<std::uint64_t>(object);
            for (int defect = 0; defect < 4; ++defect) {
                TrialSpec t;
                t.participant = schedule.participant;
                t.condition = condition;
                t.condition_position = position;
                t.object_index = object;
                t.object_seed = derive_seed(master_seed, {participant, code, obj});
                t.trial_seed = derive_seed(master_seed, {participant, code, obj, static_cast<std::uint64_t>(defect)});
                t.defect_index = defect;
                if (object == 0) {
                    t.phase = Phase::Training;
                    t.measure = defect < 2 ? Measure::Time : Measure::Awareness;
                } else {
                    t.phase = Phase::Main;
                    t.measure = object <= 2 ? Measure::Time : Measure::Awareness;
                }
                trials.push_back(t);
            }
        }
    }
    return trials;
}

bool clip_gate(Plane1D clip, const DefectRegion& defect, const Similarity& transform) {
    const double center_y = transform.apply(defect.center).y;
    const double radius = transform.scale * defect.radius;
    return std::abs(clip.height - center_y) <= radius;
}

//---------------------------------------------------------------------------//
// Replay
//---------------------------------------------------------------------------//

TrialRunner::TrialRunner(TrialContext context, const NavConfig& config) : context_(std::move(context)) {
    if (!context_.object) throw ContractError("TrialRunner: missing object");
    state_ = new_session(config, context_.object);
    const int target = context_.spec.target_id();
    for (const auto& d : context_.object->defects) {
        if (d.id == target) target_ = &d;
    }
    if (!target_) throw DomainError("TrialRunner: target defect " + std::to_string(target) + " not in the object");
    outcome_.final_state = state_;
}

void TrialRunner::record(const LogEntry& entry, std::vector<LogEntry>& derived) {
    derived.push_back(entry);
    outcome_.annotated.entries.push_back(entry);
}

std::vector<LogEntry> TrialRunner::apply(const LogEntry& entry) {
    const std::size_t index = applied_;
    if (entry.t_ms < 0) throw ReplayError("entry " + std::to_string(index) + ": negative timestamp", index);
    if (entry.t_ms < last_t_) throw ReplayError("entry " + std::to_string(index) + ": timestamp goes backwards", index);
    last_t_ = entry.t_ms;
    ++applied_;

    std::vector<LogEntry> derived;
    const bool annotation = std::holds_alternative<GateEvent>(entry.event) ||
                            std::holds_alternative<RevealEvent>(entry.event) ||
                            std::holds_alternative<RejectEvent>(entry.event);
    if (annotation) return derived;  // recomputed below, never trusted
    outcome_.annotated.entries.push_back(entry);

    Rejection rejection = Rejection::None;
    bool gate_rejected = false;
    std::visit(overloaded{
                   [&](const AimEvent& e) {
                       ++outcome_.aims;
                       NavStep step = aim(state_, e.ray);
                       rejection = step.rejection;
                       state_ = std::move(step.state);
                   },
                   [&](const ConfirmEvent&) {
                       ++outcome_.confirms;
                       if (!gate_open()) {
                           gate_rejected = true;
                           return;
                       }
                       NavStep step = confirm(state_);
                       rejection = step.rejection;
                       state_ = std::move(step.state);
                   },
                   [&](const AscendEvent&) {
                       NavStep step = ascend(state_);
                       rejection = step.rejection;
                       state_ = std::move(step.state);
                   },
                   [&](const ClipEvent& e) { state_ = set_clip_height(state_, e.height); },
                   [&](const TickEvent& e) { state_ = tick(state_, e.dt_ms); },
                   [&](const AnswerEvent& e) {
                       RecordedAnswer answer{e.question, e.choice, std::nullopt};
                       const std::optional<Question>* posed = nullptr;
                       if (e.question == "q1") posed = &outcome_.q1;
                       if (e.question == "q2") posed = &context_.q2;
                       if (posed && posed->has_value() && e.choice >= 0 && e.choice <= 3) {
                           answer.correct = score_answer(**posed, e.choice).correct;
                       }
                       outcome_.answers.push_back(std::move(answer));
                   },
                   [](const auto&) {},
               },
               entry.event);

    if (gate_rejected || rejection != Rejection::None) {
        ++outcome_.rejections;
        record({entry.t_ms, RejectEvent{std::string(event_name(entry.event)),
                                        gate_rejected ? "gate_closed" : std::string(to_string(rejection))}},
               derived);
    }
    if (!gate_open() && clip_gate(state_.clip, *target_, state_.transform)) {
        outcome_.gate_ms = entry.t_ms;
        record({entry.t_ms, GateEvent{target_->id}}, derived);
    }
    if (!outcome_.reveal_ms && reveal_defect(state_, context_.object->defects) == target_->id) {
        outcome_.reveal_ms = entry.t_ms;
        outcome_.completed = true;
        record({entry.t_ms, RevealEvent{target_->id}}, derived);
    }
    const int probe_depth = state_.config.max_depth - 1;
    if (context_.spec.measure == Measure::Awareness && !outcome_.q1 && probe_depth >= 1 &&
        state_.depth() == probe_depth) {
        outcome_.q1 = make_q1(state_, context_.spec.trial_seed);
    }
    return derived;
}

TrialOutcome TrialRunner::finish() const {
    TrialOutcome out = outcome_;
    out.final_state = state_;
    if (out.completed) {
        const std::int64_t gate = *out.gate_ms;
        const std::int64_t reveal = *out.reveal_ms;
        out.metrics = TrialMetrics{gate, reveal - gate, reveal};
    }
    return out;
}

TrialOutcome run_trial(const TrialContext& context, const EventLog& events, const NavConfig& config) {
    TrialRunner runner(context, config);
    for (const auto& entry : events.entries) runner.apply(entry);
    return runner.finish();
}

}  // namespace primo
