#include "exo/control_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "exo/errors.hpp"

namespace exo {

Ticks seconds_to_ticks(double seconds) {
  if (!std::isfinite(seconds)) throw DomainError("time must be finite");
  return Ticks{std::llround(seconds * 1e6)};
}

std::string to_string(Latch v) { return v == Latch::high ? "high" : "low"; }
std::string to_string(Relay v) { return v == Relay::closed ? "closed" : "open"; }
std::string to_string(Valve v) { return v == Valve::retract_position ? "retract" : "extend"; }
std::string to_string(FaultKind v) { return v == FaultKind::sensor_stuck ? "sensor_stuck" : "none"; }

void SimTrace::validate() const {
  Ticks last{0};
  for (std::size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& e = events[i];
    if (e.time < Ticks{0}) throw DomainError(fmt::format("trace event {}: negative time", i + 1));
    if (e.time < last) throw DomainError(fmt::format("trace event {}: time goes backwards", i + 1));
    if (e.channel == Channel::sound_level && !(e.value >= 0.0 && e.value <= 1.0))
      throw DomainError(fmt::format("trace event {}: sound level {} outside [0, 1]", i + 1, e.value));
    last = e.time;
  }
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, int line_no, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(fmt::format("trace line {}: invalid {} '{}'", line_no, what, text));
  }
}

}  // namespace

SimTrace parse_trace_csv(std::istream& in) {
  SimTrace trace;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"time_s", "channel", "value"})
        throw ParseError(fmt::format("trace line {}: expected header 'time_s,channel,value'", line_no));
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw ParseError(fmt::format("trace line {}: expected 3 fields, got {}", line_no, fields.size()));

    TraceEvent e;
    e.time = seconds_to_ticks(parse_number(fields[0], line_no, "time"));
    const std::string& channel = fields[1];
    if (channel == "sound_level") {
      e.channel = Channel::sound_level;
      e.value = parse_number(fields[2], line_no, "sound level");
    } else if (channel == "manual_switch") {
      e.channel = Channel::manual_switch;
      e.value = parse_number(fields[2], line_no, "switch value");
    } else if (channel == "fault" || channel == "fault_injection") {
      e.channel = Channel::fault;
      if (fields[2] == "sensor_stuck") {
        e.fault = FaultKind::sensor_stuck;
        e.value = 1.0;
      } else if (fields[2] == "none") {
        e.fault = FaultKind::none;
      } else {
        throw ParseError(fmt::format("trace line {}: unknown fault '{}'", line_no, fields[2]));
      }
    } else {
      throw ParseError(fmt::format("trace line {}: unknown channel '{}'", line_no, channel));
    }
    trace.events.push_back(e);
  }
  if (!header_seen) throw ParseError("trace: missing header 'time_s,channel,value'");
  try {
    trace.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return trace;
}

SimTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read trace '{}'", path));
  return parse_trace_csv(in);
}

void ControlConfig::validate() const {
  if (!(sound_threshold > 0.0 && sound_threshold <= 1.0))
    throw DomainError("sound threshold must lie in (0, 1]");
  if (debounce_window < Ticks{0} || relay_delay < Ticks{0})
    throw DomainError("debounce window and relay delay must be nonnegative");
  if (!(flow_rate_retract > 0.0) || !(flow_rate_extend > 0.0))
    throw DomainError("flow rates must be positive");
}

namespace {

// Indices of trace events that fire a detection.
std::vector<std::size_t> detection_indices(const SimTrace& trace, double threshold,
                                           Ticks debounce_window) {
  std::vector<std::size_t> out;
  double previous = 0.0;
  std::optional<Ticks> last_detection;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& e = trace.events[i];
    if (e.channel != Channel::sound_level) continue;
    const bool crossing = previous < threshold && e.value >= threshold;
    previous = e.value;
    if (!crossing) continue;
    if (last_detection && e.time - *last_detection < debounce_window) continue;
    out.push_back(i);
    last_detection = e.time;
  }
  return out;
}

}  // namespace

std::vector<Ticks> detect_sound(const SimTrace& trace, double threshold, Ticks debounce_window) {
  std::vector<Ticks> out;
  for (std::size_t i : detection_indices(trace, threshold, debounce_window))
    out.push_back(trace.events[i].time);
  return out;
}

LatchStep step_latch(const SystemState& state, const LatchEvent& event, const ControlConfig& config) {
  LatchStep out{state, false, false};
  auto toggle = [&] {
    out.state.latch = state.latch == Latch::low ? Latch::high : Latch::low;
    out.accepted = true;
    out.toggled = true;
  };
  switch (event.kind) {
    case LatchEventKind::detection:
      if (state.fault == FaultKind::none) toggle();
      break;
    case LatchEventKind::manual_toggle:
      if (config.manual_override) toggle();
      break;
    case LatchEventKind::fault:
      out.state.fault = event.fault;
      out.accepted = true;
      break;
  }
  return out;
}

double piston_speed(Valve valve, const CylinderSpec& spec, const ControlConfig& config) {
  return valve == Valve::retract_position ? config.flow_rate_retract / spec.rod_area()
                                          : config.flow_rate_extend / spec.cap_area();
}

CylinderStep cylinder_step(const SystemState& state, const CylinderSpec& spec,
                           const ControlConfig& config, double required_force, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  CylinderStep out{state, false};
  const bool retracting = state.valve == Valve::retract_position;
  const bool travel_left = retracting ? state.piston_extension > 0.0 : state.piston_extension < spec.stroke;
  if (!travel_left) {
    out.state.stalled = false;
    return out;
  }
  const ActingSide driving = retracting ? ActingSide::rod : ActingSide::cap;
  if (available_force(spec, driving) < required_force) {
    out.stalled = true;
    out.state.stalled = true;
    return out;
  }
  const double travel = piston_speed(state.valve, spec, config) * dt;
  const double next = retracting ? state.piston_extension - travel : state.piston_extension + travel;
  out.state.piston_extension = std::clamp(next, 0.0, spec.stroke);
  out.state.stalled = false;
  return out;
}

SimTrajectory SimTrajectory::window(Ticks from, Ticks to) const {
  SimTrajectory out;
  out.sample_step = sample_step;
  for (const auto& r : rows)
    if (r.time >= from && r.time <= to) out.rows.push_back(r);
  return out;
}

void write_trajectory_csv(std::ostream& out, const SimTrajectory& trajectory) {
  out << "time_s,latch,relay,valve,piston_extension_m,elbow_angle_deg,transfer_angle_deg,"
         "load_height_m,force_margin\n";
  for (const auto& r : trajectory.rows) {
    out << fmt::format("{:.6f},{},{},{},{:.9f},{:.6f},{:.6f},{:.9f},{}\n", ticks_to_seconds(r.time),
                       to_string(r.latch), to_string(r.relay), to_string(r.valve), r.piston_extension,
                       rad_to_deg(r.elbow_angle), rad_to_deg(r.transfer_angle), r.load_height,
                       r.force_margin ? fmt::format("{:.6f}", *r.force_margin) : std::string("na"));
  }
}

bool SimSummary::pass() const noexcept {
  if (stalls > 0 || transfer_angle_violations > 0) return false;
  return !min_force_margin || *min_force_margin >= 1.0;
}

namespace {

constexpr double kStrokeTolerance = 5e-4;  // m

class Simulator {
 public:
  Simulator(const ArmGeometry& geometry, const LoadCase& load, const CylinderSpec& spec,
            const ControlConfig& config, const SimTrace& trace, const SimOptions& options)
      : geometry_(geometry), load_(load), spec_(spec), config_(config), trace_(trace), options_(options) {}

  SimResult run() {
    check_inputs();
    full_length_ = piston_length(geometry_, options_.sweep.max);
    rod_force_ = available_force(spec_, ActingSide::rod);
    build_inputs();

    state_.piston_extension = spec_.stroke;
    state_.elbow_angle = elbow_at(state_.piston_extension);
    result_.trajectory.sample_step = options_.sample_step;

    const std::int64_t samples = options_.duration / options_.sample_step;
    for (std::int64_t k = 0; k <= samples; ++k) {
      const Ticks sample_time = options_.sample_step * k;
      for (;;) {
        const Ticks next = next_event_time();
        if (next > sample_time) break;
        advance_to(next);
        apply_events_at(next);
      }
      advance_to(sample_time);
      record_row();
    }
    summarize();
    return std::move(result_);
  }

 private:
  struct ScheduledInput {
    Ticks time;
    LatchEvent event;
  };

  void check_inputs() const {
    geometry_.validate();
    load_.validate();
    spec_.validate();
    config_.validate();
    trace_.validate();
    options_.sweep.validate();
    if (options_.sample_step <= Ticks{0}) throw DomainError("sample step must be positive");
    if (options_.duration < Ticks{0}) throw DomainError("duration must be nonnegative");
    if (trace_.end_time() > options_.duration)
      throw ConfigInconsistency(fmt::format("duration {:.3f} s ends before the last trace event at {:.3f} s",
                                            ticks_to_seconds(options_.duration),
                                            ticks_to_seconds(trace_.end_time())));
    if (std::abs(options_.sweep.max - geometry_.initial_elbow_angle()) > 1e-9)
      throw ConfigInconsistency(fmt::format(
          "sweep maximum {:.4f}° must equal the initial elbow angle {:.4f}°", rad_to_deg(options_.sweep.max),
          rad_to_deg(geometry_.initial_elbow_angle())));
    const double geometric = stroke_required(geometry_, options_.sweep);
    if (std::abs(geometric - spec_.stroke) > kStrokeTolerance)
      throw ConfigInconsistency(fmt::format("cylinder stroke {:.2f} mm does not match the {:.2f} mm the sweep needs",
                                            m_to_mm(spec_.stroke), m_to_mm(geometric)));
  }

  void build_inputs() {
    const auto detections =
        detection_indices(trace_, config_.sound_threshold, config_.debounce_window);
    std::size_t d = 0;
    for (std::size_t i = 0; i < trace_.events.size(); ++i) {
      const TraceEvent& e = trace_.events[i];
      switch (e.channel) {
        case Channel::sound_level:
          if (d < detections.size() && detections[d] == i) {
            inputs_.push_back({e.time, {LatchEventKind::detection}});
            result_.log.detections.push_back(e.time);
            ++d;
          }
          break;
        case Channel::manual_switch:
          if (e.value >= 0.5) inputs_.push_back({e.time, {LatchEventKind::manual_toggle}});
          break;
        case Channel::fault:
          inputs_.push_back({e.time, {LatchEventKind::fault, e.fault}});
          break;
      }
    }
  }

  Ticks next_event_time() const {
    Ticks next = Ticks::max();
    if (next_input_ < inputs_.size()) next = inputs_[next_input_].time;
    if (!relay_queue_.empty()) next = std::min(next, relay_queue_.front().first);
    return next;
  }

  void apply_events_at(Ticks t) {
    while (next_input_ < inputs_.size() && inputs_[next_input_].time == t) {
      const LatchEvent& ev = inputs_[next_input_++].event;
      const LatchStep step = step_latch(state_, ev, config_);
      state_ = step.state;
      if (ev.kind == LatchEventKind::fault) continue;
      if (!step.accepted) {
        ++result_.log.rejected_events;
        continue;
      }
      ++result_.log.accepted_toggles;
      result_.log.latch_transitions.push_back(t);
      relay_queue_.emplace_back(t + config_.relay_delay, state_.latch);
    }
    while (!relay_queue_.empty() && relay_queue_.front().first == t) {
      const Relay target = relay_queue_.front().second == Latch::high ? Relay::closed : Relay::open;
      relay_queue_.pop_front();
      result_.log.relay_transitions.push_back(t);
      state_.relay = target;
      set_valve(valve_for(target), t);
    }
  }

  void set_valve(Valve valve, Ticks t) {
    if (valve == state_.valve) return;
    state_.valve = valve;
    if (valve == Valve::retract_position) {
      lift_active_ = true;
      lift_from_full_ = state_.piston_extension >= spec_.stroke;
      lift_start_ = t;
    } else {
      lift_active_ = false;
    }
  }

  void advance_to(Ticks t) {
    if (t <= state_.time) return;
    const double dt = ticks_to_seconds(t - state_.time);
    const double start_ext = state_.piston_extension;
    const bool retracting = state_.valve == Valve::retract_position;
    const double required = retracting ? lift_force(state_.elbow_angle) : 0.0;

    const CylinderStep step = cylinder_step(state_, spec_, config_, required, dt);
    if (step.stalled && !state_.stalled) result_.log.stall_onsets.push_back(state_.time);
    const Ticks t0 = state_.time;
    state_ = step.state;
    state_.time = t;
    state_.elbow_angle = elbow_at(state_.piston_extension);

    if (retracting && lift_active_ && start_ext > 0.0 && state_.piston_extension == 0.0) {
      const double reach = ticks_to_seconds(t0) + start_ext / piston_speed(Valve::retract_position, spec_, config_);
      if (lift_from_full_) {
        const double start_s = ticks_to_seconds(lift_start_);
        result_.lifts.push_back({lift_start_, reach, reach - start_s});
      }
      lift_active_ = false;
    }
  }

  void record_row() {
    TrajectoryRow row;
    row.time = state_.time;
    row.latch = state_.latch;
    row.relay = state_.relay;
    row.valve = state_.valve;
    row.piston_extension = state_.piston_extension;
    row.elbow_angle = state_.elbow_angle;
    row.transfer_angle = transfer_angle_at(geometry_, state_.elbow_angle);
    row.load_height = geometry_.load_height_at(state_.elbow_angle);
    const double required = lift_force(state_.elbow_angle);
    if (required > 0.0) row.force_margin = rod_force_ / required;
    row.stalled = state_.stalled;
    result_.trajectory.rows.push_back(row);
  }

  void summarize() {
    SimSummary& s = result_.summary;
    s.lifts = static_cast<int>(result_.lifts.size());
    for (const auto& lift : result_.lifts) s.lift_durations.push_back(lift.duration_s);
    s.max_transfer_angle_deg = -std::numeric_limits<double>::infinity();
    for (const auto& row : result_.trajectory.rows) {
      s.peak_required_force = std::max(s.peak_required_force, lift_force(row.elbow_angle));
      if (row.force_margin)
        s.min_force_margin = s.min_force_margin ? std::min(*s.min_force_margin, *row.force_margin)
                                                : *row.force_margin;
      const TransferAngleCheck check = check_transfer_angle(geometry_, row.elbow_angle);
      if (!check.pass) ++s.transfer_angle_violations;
      s.max_transfer_angle_deg = std::max(s.max_transfer_angle_deg, rad_to_deg(check.angle));
    }
    s.stalls = static_cast<int>(result_.log.stall_onsets.size());
    s.detections = static_cast<int>(result_.log.detections.size());
    s.accepted_toggles = result_.log.accepted_toggles;
    s.rejected_events = result_.log.rejected_events;
  }

  double elbow_at(double extension) const {
    const double length = full_length_ - (spec_.stroke - extension);
    return elbow_angle_from_piston(geometry_, length);
  }

  double lift_force(double elbow_angle) const {
    return required_piston_force_at(geometry_, load_, elbow_angle).f_piston;
  }

  const ArmGeometry& geometry_;
  const LoadCase& load_;
  const CylinderSpec& spec_;
  const ControlConfig& config_;
  const SimTrace& trace_;
  const SimOptions& options_;

  double full_length_ = 0.0;
  double rod_force_ = 0.0;
  SystemState state_;
  std::vector<ScheduledInput> inputs_;
  std::size_t next_input_ = 0;
  std::deque<std::pair<Ticks, Latch>> relay_queue_;
  bool lift_active_ = false;
  bool lift_from_full_ = false;
  Ticks lift_start_{0};
  SimResult result_;
};

}  // namespace

SimResult run_simulation(const ArmGeometry& geometry, const LoadCase& load, const CylinderSpec& spec,
                         const ControlConfig& config, const SimTrace& trace, const SimOptions& options) {
  return Simulator(geometry, load, spec, config, trace, options).run();
}

EnergyAudit energy_audit(const SimTrajectory& trajectory, const ArmGeometry& geometry,
                         const LoadCase& load) {
  EnergyAudit audit;
  const auto& rows = trajectory.rows;
  if (rows.size() < 2) return audit;
  auto force = [&](double elbow) { return required_piston_force_at(geometry, load, elbow).f_piston; };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double travel = rows[i - 1].piston_extension - rows[i].piston_extension;
    if (travel <= 0.0) continue;
    audit.piston_work += 0.5 * (force(rows[i - 1].elbow_angle) + force(rows[i].elbow_angle)) * travel;
  }
  audit.potential_energy = load.weight() * (rows.back().load_height - rows.front().load_height);
  return audit;
}

}  // namespace exo
