#pragma once

// Discrete-event model of the command chain:
//   sound envelope -> threshold/debounce -> toggle latch -> relay (delayed)
//   -> 5/2 valve -> flow-limited double-acting cylinder -> elbow angle.
//
// Time is kept in integer microseconds so event ordering and the relay lag
// are exact. The engine is single-threaded and deterministic: identical
// inputs give identical trajectories bit for bit.

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "exo/arm_statics.hpp"
#include "exo/pneumatic_sizing.hpp"

namespace exo {

using Ticks = std::chrono::duration<std::int64_t, std::micro>;

Ticks seconds_to_ticks(double seconds);
constexpr double ticks_to_seconds(Ticks t) noexcept { return static_cast<double>(t.count()) * 1e-6; }

enum class Channel { sound_level, manual_switch, fault };
enum class FaultKind { none, sensor_stuck };

struct TraceEvent {
  Ticks time{0};
  Channel channel = Channel::sound_level;
  double value = 0.0;             // sound level 0..1, or 1 for a switch press
  FaultKind fault = FaultKind::none;  // fault channel only
};

struct SimTrace {
  std::vector<TraceEvent> events;

  // Times nondecreasing and nonnegative, sound levels in [0, 1]. Throws DomainError.
  void validate() const;
  Ticks end_time() const noexcept { return events.empty() ? Ticks{0} : events.back().time; }
};

// Header `time_s,channel,value`; channels sound_level, manual_switch, fault.
SimTrace parse_trace_csv(std::istream& in);
SimTrace load_trace_csv(const std::string& path);

struct ControlConfig {
  double sound_threshold = 0.5;
  Ticks debounce_window = std::chrono::milliseconds(300);
  Ticks relay_delay = std::chrono::milliseconds(10);
  // m^3/s through the flow-control valves; 6.2832e-5 over the 30/10 mm annulus is 0.1 m/s.
  double flow_rate_retract = 6.2832e-5;
  double flow_rate_extend = 6.2832e-5;
  bool manual_override = true;

  void validate() const;
};

// Upward threshold crossings, skipping any within `debounce_window` of the last accepted one.
std::vector<Ticks> detect_sound(const SimTrace& trace, double threshold, Ticks debounce_window);

enum class Latch { low, high };
enum class Relay { open, closed };
enum class Valve { extend_position, retract_position };

std::string to_string(Latch v);
std::string to_string(Relay v);
std::string to_string(Valve v);
std::string to_string(FaultKind v);

struct SystemState {
  Latch latch = Latch::low;
  Relay relay = Relay::open;
  Valve valve = Valve::extend_position;
  double piston_extension = 0.0;  // m in [0, stroke]
  double elbow_angle = 0.0;       // rad
  Ticks time{0};
  FaultKind fault = FaultKind::none;
  bool stalled = false;
};

enum class LatchEventKind { detection, manual_toggle, fault };

struct LatchEvent {
  LatchEventKind kind = LatchEventKind::detection;
  FaultKind fault = FaultKind::none;  // for kind == fault
};

struct LatchStep {
  SystemState state;
  bool accepted = false;  // false: event rejected, state unchanged
  bool toggled = false;
};

LatchStep step_latch(const SystemState& state, const LatchEvent& event, const ControlConfig& config);

// Valve position the relay commands; the design lifts on retraction.
constexpr Valve valve_for(Relay relay) noexcept {
  return relay == Relay::closed ? Valve::retract_position : Valve::extend_position;
}

// Piston speed magnitude for the valve position: flow / area of the driving chamber.
double piston_speed(Valve valve, const CylinderSpec& spec, const ControlConfig& config);

struct CylinderStep {
  SystemState state;
  bool stalled = false;
};

// Moves the piston for `dt` seconds. If the driving side cannot supply
// `required_force` the piston holds position and `stalled` is raised.
CylinderStep cylinder_step(const SystemState& state, const CylinderSpec& spec,
                           const ControlConfig& config, double required_force, double dt);

struct SimOptions {
  Ticks duration = std::chrono::seconds(10);
  Ticks sample_step = std::chrono::milliseconds(10);
  SweepRange sweep;
};

struct TrajectoryRow {
  Ticks time{0};
  Latch latch = Latch::low;
  Relay relay = Relay::open;
  Valve valve = Valve::extend_position;
  double piston_extension = 0.0;
  double elbow_angle = 0.0;     // rad
  double transfer_angle = 0.0;  // rad
  double load_height = 0.0;     // m, C relative to A
  std::optional<double> force_margin;  // rod-side available / required at this pose
  bool stalled = false;
};

struct SimTrajectory {
  Ticks sample_step{0};
  std::vector<TrajectoryRow> rows;

  // Rows with from <= time <= to.
  SimTrajectory window(Ticks from, Ticks to) const;
};

// Header `time_s,latch,relay,valve,piston_extension_m,elbow_angle_deg,transfer_angle_deg,load_height_m,force_margin`.
void write_trajectory_csv(std::ostream& out, const SimTrajectory& trajectory);

struct LiftRecord {
  Ticks start{0};      // valve entered retract-position
  double end_s = 0.0;  // piston reached full retraction
  double duration_s = 0.0;
};

struct EventLog {
  std::vector<Ticks> detections;
  std::vector<Ticks> latch_transitions;
  std::vector<Ticks> relay_transitions;
  std::vector<Ticks> stall_onsets;
  int accepted_toggles = 0;
  int rejected_events = 0;
};

struct SimSummary {
  int lifts = 0;
  std::vector<double> lift_durations;  // s
  double peak_required_force = 0.0;    // N over all sampled poses
  std::optional<double> min_force_margin;
  int transfer_angle_violations = 0;   // samples past 135°
  double max_transfer_angle_deg = 0.0;
  int stalls = 0;
  int detections = 0;
  int accepted_toggles = 0;
  int rejected_events = 0;

  bool pass() const noexcept;
};

struct SimResult {
  SimTrajectory trajectory;
  SimSummary summary;
  EventLog log;
  std::vector<LiftRecord> lifts;
};

// Throws ConfigInconsistency (or the validation errors of the inputs) before simulating.
SimResult run_simulation(const ArmGeometry& geometry, const LoadCase& load, const CylinderSpec& spec,
                         const ControlConfig& config, const SimTrace& trace, const SimOptions& options);

struct EnergyAudit {
  double piston_work = 0.0;       // J over retracting samples
  double potential_energy = 0.0;  // J, m g (final - initial load height)
};

EnergyAudit energy_audit(const SimTrajectory& trajectory, const ArmGeometry& geometry,
                         const LoadCase& load);

}  // namespace exo
