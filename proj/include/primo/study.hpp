#pragma once

// Experiment apparatus: counterbalanced condition orders, trial lists,
// the clip gate, deterministic event-log replay and the location-awareness
// probes.

#include "primo/navigation.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace primo {

struct Condition {
    DisplayMode display = DisplayMode::Selection;
    NavStyle style = NavStyle::Structured;

    // 0..3, display-major.
    int code() const { return 2 * static_cast<int>(display) + static_cast<int>(style); }

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct ParticipantSchedule {
    int participant = 0;
    std::array<Condition, 4> condition_order;
};

enum class Measure { Time, Awareness };
enum class Phase { Training, Main };

struct TrialSpec {
    int participant = 0;
    Condition condition;
    int condition_position = 0;  // 0..3 within the participant's order
    int object_index = 0;        // 0 = training object, 1..4 main objects
    std::uint64_t object_seed = 0;
    std::uint64_t trial_seed = 0;
    int defect_index = 0;        // 0..3; targets defect id defect_index + 1
    Measure measure = Measure::Time;
    Phase phase = Phase::Main;

    int target_id() const { return defect_index + 1; }

    friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

//---------------------------------------------------------------------------//
// Events
//---------------------------------------------------------------------------//

struct AimEvent {
    Ray ray;
};
struct ConfirmEvent {};
struct AscendEvent {};
struct ClipEvent {
    double height = 1.0;
};
struct TickEvent {
    double dt_ms = 0.0;
};
struct GateEvent {
    int defect = 0;
};
struct RevealEvent {
    int defect = 0;
};
struct AnswerEvent {
    std::string question;  // "q1" or "q2"
    int choice = 0;
};
struct RejectEvent {
    std::string event;
    std::string reason;
};

using Event = std::variant<AimEvent, ConfirmEvent, AscendEvent, ClipEvent, TickEvent, GateEvent, RevealEvent,
                           AnswerEvent, RejectEvent>;

std::string_view event_name(const Event& e);

struct LogEntry {
    std::int64_t t_ms = 0;  // relative to trial start
    Event event;
};

struct EventLog {
    std::vector<LogEntry> entries;
};

struct JsonlOptions {
    // Ignore an unparsable final line without a trailing newline.
    bool tolerate_truncated_tail = true;
};

// One `{"t":..,"e":..,"data":{..}}` object per line, fields in that order.
std::string to_jsonl(const EventLog& log);
std::string to_jsonl_line(const LogEntry& entry);
// Throws ReplayError carrying the 0-based line index.
EventLog parse_jsonl(std::string_view text, const JsonlOptions& options = {});
LogEntry parse_jsonl_line(std::string_view line, std::size_t index);

//---------------------------------------------------------------------------//
// Questions
//---------------------------------------------------------------------------//

enum class QuestionKind { Q1Location, Q2Object };

struct Question {
    QuestionKind kind = QuestionKind::Q1Location;
    std::array<std::vector<Vec3>, 4> choices;
    int correct_index = 0;
};

Question make_q1(const NavState& state, std::uint64_t seed);
Question make_q2(const std::vector<DefectRegion>& defects, std::uint64_t seed);

struct AnswerScore {
    bool correct = false;
};

AnswerScore score_answer(const Question& q, int picked);
double accuracy(const std::vector<AnswerScore>& scores);

//---------------------------------------------------------------------------//
// Schedules and trials
//---------------------------------------------------------------------------//

inline constexpr int kTrialsPerParticipant = 80;

std::vector<ParticipantSchedule> build_schedule(int n_participants);
std::vector<TrialSpec> build_trials(const ParticipantSchedule& schedule, std::uint64_t master_seed);

// Plane at stage height `clip.height` intersects the defect sphere after
// mapping it to world space (boundary inclusive).
bool clip_gate(Plane1D clip, const DefectRegion& defect, const Similarity& transform);

//---------------------------------------------------------------------------//
// Replay
//---------------------------------------------------------------------------//

struct TrialMetrics {
    std::int64_t clipping_ms = 0;
    std::int64_t navigation_ms = 0;
    std::int64_t total_ms = 0;

    friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

struct TrialContext {
    TrialSpec spec;
    std::shared_ptr<const SessionObject> object;
    std::optional<Question> q2;  // object-level probe, scored when answered
};

struct RecordedAnswer {
    std::string question;
    int choice = 0;
    std::optional<bool> correct;  // unknown when no such question was posed

    friend bool operator==(const RecordedAnswer&, const RecordedAnswer&) = default;
};

struct TrialOutcome {
    bool completed = false;
    std::optional<TrialMetrics> metrics;
    std::optional<std::int64_t> gate_ms;
    std::optional<std::int64_t> reveal_ms;
    int rejections = 0;
    int aims = 0;
    int confirms = 0;
    NavState final_state;
    EventLog annotated;  // input navigation events plus derived gate/reveal/reject entries
    std::optional<Question> q1;
    std::vector<RecordedAnswer> answers;
};

// Incremental replay of one trial. Enforces the clip gate (confirms before
// it opens are rejected), derives gate/reveal times and fires Q1 on
// awareness trials when the focus first reaches max_depth - 1.
class TrialRunner {
public:
    TrialRunner(TrialContext context, const NavConfig& config);

    // Throws ReplayError for out-of-order or negative timestamps.
    // Returns the derived entries produced by this event.
    std::vector<LogEntry> apply(const LogEntry& entry);

    const NavState& state() const { return state_; }
    bool gate_open() const { return outcome_.gate_ms.has_value(); }
    const TrialOutcome& outcome() const { return outcome_; }
    const TrialContext& context() const { return context_; }
    const DefectRegion& target() const { return *target_; }
    std::size_t applied() const { return applied_; }

    TrialOutcome finish() const;

private:
    void record(const LogEntry& entry, std::vector<LogEntry>& derived);

    TrialContext context_;
    NavState state_;
    const DefectRegion* target_ = nullptr;
    TrialOutcome outcome_;
    std::int64_t last_t_ = 0;
    std::size_t applied_ = 0;
};

TrialOutcome run_trial(const TrialContext& context, const EventLog& events, const NavConfig& config);

}  // namespace primo
