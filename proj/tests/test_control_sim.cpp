#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "exo/control_sim.hpp"
#include "exo/errors.hpp"

using namespace exo;
using std::chrono::milliseconds;

namespace {

TraceEvent sound(double t, double level) { return {seconds_to_ticks(t), Channel::sound_level, level}; }
TraceEvent press(double t) { return {seconds_to_ticks(t), Channel::manual_switch, 1.0}; }
TraceEvent fault(double t, FaultKind k) { return {seconds_to_ticks(t), Channel::fault, 0.0, k}; }

// A pulse: rise above threshold at t, fall 80 ms later.
void pulse(SimTrace& trace, double t) {
  trace.events.push_back(sound(t, 0.8));
  trace.events.push_back(sound(t + 0.08, 0.1));
}

SimTrace two_pulse() {
  SimTrace trace;
  trace.events.push_back(sound(0.0, 0.05));
  pulse(trace, 1.0);
  pulse(trace, 6.0);
  return trace;
}

CylinderSpec reference_cylinder() { return CylinderSpec{}; }

SimOptions options(double duration_s) {
  SimOptions o;
  o.duration = seconds_to_ticks(duration_s);
  return o;
}

SimResult simulate(const SimTrace& trace, const LoadCase& load = {}, double duration_s = 10.0,
                   const ControlConfig& config = {}) {
  return run_simulation(ArmGeometry{}, load, reference_cylinder(), config, trace, options(duration_s));
}

std::string csv(const SimTrajectory& t) {
  std::ostringstream s;
  write_trajectory_csv(s, t);
  return s.str();
}

}  // namespace

TEST_CASE("seconds_to_ticks") {
  CHECK(seconds_to_ticks(1.01).count() == 1010000);
  CHECK(seconds_to_ticks(0.0).count() == 0);
  CHECK(ticks_to_seconds(milliseconds(1500)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(seconds_to_ticks(std::nan("")), DomainError);
}

TEST_CASE("detect_sound") {
  const Ticks debounce = milliseconds(300);

  SimTrace apart;
  pulse(apart, 1.0);
  pulse(apart, 5.0);
  CHECK(detect_sound(apart, 0.5, debounce) == std::vector<Ticks>{milliseconds(1000), milliseconds(5000)});

  SimTrace close;
  close.events = {sound(1.0, 0.9), sound(1.05, 0.1), sound(1.1, 0.9), sound(1.15, 0.1)};
  CHECK(detect_sound(close, 0.5, debounce) == std::vector<Ticks>{milliseconds(1000)});

  SimTrace quiet;
  quiet.events = {sound(0.0, 0.1), sound(1.0, 0.49), sound(2.0, 0.2)};
  CHECK(detect_sound(quiet, 0.5, debounce).empty());
  CHECK(detect_sound(SimTrace{}, 0.5, debounce).empty());

  SUBCASE("holding above threshold is one crossing") {
    SimTrace held;
    held.events = {sound(1.0, 0.9), sound(2.0, 0.95), sound(3.0, 0.7)};
    CHECK(detect_sound(held, 0.5, debounce).size() == 1);
  }

  SUBCASE("debounce spacing holds for random traces") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> level(0.0, 1.0);
    std::uniform_int_distribution<int> gap_ms(1, 400);
    for (int run = 0; run < 50; ++run) {
      SimTrace t;
      Ticks now{0};
      for (int i = 0; i < 200; ++i) {
        now += milliseconds(gap_ms(rng));
        t.events.push_back({now, Channel::sound_level, level(rng)});
      }
      const auto d = detect_sound(t, 0.5, debounce);
      for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] - d[i - 1] >= debounce);
    }
  }
}

TEST_CASE("step_latch") {
  const ControlConfig config;
  SystemState s;

  const LatchStep up = step_latch(s, {LatchEventKind::detection}, config);
  CHECK(up.state.latch == Latch::high);
  CHECK(up.toggled);
  const LatchStep down = step_latch(up.state, {LatchEventKind::detection}, config);
  CHECK(down.state.latch == Latch::low);

  SUBCASE("stuck sensor ignores detections but not the switch") {
    const LatchStep faulted = step_latch(s, {LatchEventKind::fault, FaultKind::sensor_stuck}, config);
    CHECK(faulted.state.fault == FaultKind::sensor_stuck);
    const LatchStep ignored = step_latch(faulted.state, {LatchEventKind::detection}, config);
    CHECK(ignored.state.latch == Latch::low);
    CHECK_FALSE(ignored.accepted);
    const LatchStep manual = step_latch(ignored.state, {LatchEventKind::manual_toggle}, config);
    CHECK(manual.state.latch == Latch::high);
    CHECK(manual.accepted);
    const LatchStep cleared = step_latch(manual.state, {LatchEventKind::fault, FaultKind::none}, config);
    CHECK(step_latch(cleared.state, {LatchEventKind::detection}, config).state.latch == Latch::low);
  }

  SUBCASE("switch without override is rejected") {
    ControlConfig locked = config;
    locked.manual_override = false;
    const LatchStep r = step_latch(s, {LatchEventKind::manual_toggle}, locked);
    CHECK_FALSE(r.accepted);
    CHECK(r.state.latch == s.latch);
  }
}

TEST_CASE("cylinder_step") {
  const CylinderSpec spec = reference_cylinder();
  const ControlConfig config;
  SystemState s;
  s.valve = Valve::retract_position;
  s.piston_extension = spec.stroke;

  CHECK(spec.rod_area() == doctest::Approx(6.2832e-4).epsilon(1e-4));
  CHECK(piston_speed(Valve::retract_position, spec, config) == doctest::Approx(0.1).epsilon(1e-4));
  CHECK(piston_speed(Valve::extend_position, spec, config) <
        piston_speed(Valve::retract_position, spec, config));

  SUBCASE("full stroke in 1.5 s") {
    const CylinderStep half = cylinder_step(s, spec, config, 264.3, 0.75);
    CHECK(half.state.piston_extension == doctest::Approx(0.075).epsilon(1e-3));
    const double t_full = spec.stroke / piston_speed(Valve::retract_position, spec, config);
    CHECK(t_full == doctest::Approx(1.5).epsilon(1e-4));
    const CylinderStep done = cylinder_step(s, spec, config, 264.3, 2.0);
    CHECK(done.state.piston_extension == 0.0);
    CHECK_FALSE(done.stalled);
  }

  SUBCASE("vanishing flow leaves the piston in place") {
    ControlConfig still = config;
    still.flow_rate_retract = 0.0;
    still.flow_rate_extend = 0.0;
    CHECK(cylinder_step(s, spec, still, 100.0, 1.0).state.piston_extension == spec.stroke);
    SystemState ext = s;
    ext.valve = Valve::extend_position;
    ext.piston_extension = 0.05;
    CHECK(cylinder_step(ext, spec, still, 0.0, 1.0).state.piston_extension == 0.05);
  }

  SUBCASE("stall above the available rod-side force") {
    const CylinderStep r = cylinder_step(s, spec, config, 377.0, 0.1);
    CHECK(r.stalled);
    CHECK(r.state.piston_extension == spec.stroke);
    CHECK_FALSE(cylinder_step(s, spec, config, 376.98, 0.1).stalled);
  }

  SUBCASE("clamped at the ends") {
    SystemState ext;
    ext.piston_extension = 0.149;
    CHECK(cylinder_step(ext, spec, config, 0.0, 5.0).state.piston_extension == spec.stroke);
  }

  CHECK_THROWS_AS(cylinder_step(s, spec, config, 0.0, 0.0), DomainError);
}

TEST_CASE("run_simulation: two pulses") {
  const SimResult r = simulate(two_pulse());
  const auto& rows = r.trajectory.rows;
  REQUIRE(rows.size() == 1001);

  CHECK(r.summary.lifts == 1);
  CHECK(r.summary.stalls == 0);
  CHECK(r.summary.transfer_angle_violations == 0);
  CHECK(r.summary.detections == 2);
  CHECK(r.summary.pass());
  REQUIRE(r.lifts.size() == 1);
  CHECK(r.lifts[0].start == milliseconds(1010));
  CHECK(r.lifts[0].duration_s == doctest::Approx(1.5).epsilon(1e-3));

  CHECK(r.log.latch_transitions == std::vector<Ticks>{milliseconds(1000), milliseconds(6000)});
  CHECK(r.log.relay_transitions == std::vector<Ticks>{milliseconds(1010), milliseconds(6010)});

  // rows every 10 ms, so row k is at k*10 ms
  CHECK(rows[100].valve == Valve::extend_position);
  CHECK(rows[100].latch == Latch::high);
  CHECK(rows[101].valve == Valve::retract_position);
  CHECK(rows[101].relay == Relay::closed);
  CHECK(rows[300].piston_extension == 0.0);
  CHECK(rad_to_deg(rows[300].elbow_angle) == doctest::Approx(42.93).epsilon(1e-3));
  CHECK(rows[300].load_height > rows[0].load_height);
  CHECK(rows[601].valve == Valve::extend_position);
  CHECK(rows.back().piston_extension == doctest::Approx(0.150).epsilon(1e-9));

  CHECK(r.summary.max_transfer_angle_deg == doctest::Approx(120.0).epsilon(1e-6));
  CHECK(r.summary.peak_required_force == doctest::Approx(305.1).epsilon(2e-3));
  REQUIRE(r.summary.min_force_margin.has_value());
  CHECK(*r.summary.min_force_margin > 1.2);
}

TEST_CASE("run_simulation: trajectory invariants") {
  const ControlConfig config;
  const CylinderSpec spec = reference_cylinder();
  const double vmax = std::max(config.flow_rate_retract, config.flow_rate_extend) /
                      std::min(spec.rod_area(), spec.cap_area());

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> when(0.2, 19.5);
  std::uniform_int_distribution<int> kind(0, 5);
  for (int run = 0; run < 20; ++run) {
    std::vector<TraceEvent> ev{sound(0.0, 0.0)};
    for (int i = 0; i < 12; ++i) {
      const double t = when(rng);
      switch (kind(rng)) {
        case 0: ev.push_back(press(t)); break;
        case 1: ev.push_back(fault(t, FaultKind::sensor_stuck)); break;
        case 2: ev.push_back(fault(t, FaultKind::none)); break;
        default: ev.push_back(sound(t, 0.9)); ev.push_back(sound(t + 0.05, 0.0)); break;
      }
    }
    std::stable_sort(ev.begin(), ev.end(), [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
    const SimResult r = simulate(SimTrace{ev}, LoadCase{}, 20.0, config);
    const auto& rows = r.trajectory.rows;

    // relay causality
    REQUIRE(r.log.relay_transitions.size() == r.log.latch_transitions.size());
    for (std::size_t i = 0; i < r.log.latch_transitions.size(); ++i)
      CHECK(r.log.relay_transitions[i] - r.log.latch_transitions[i] == config.relay_delay);

    for (std::size_t i = 1; i < r.log.detections.size(); ++i)
      CHECK(r.log.detections[i] - r.log.detections[i - 1] >= config.debounce_window);

    std::size_t toggles = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& row = rows[k];
      while (toggles < r.log.latch_transitions.size() && r.log.latch_transitions[toggles] <= row.time) ++toggles;
      CHECK(row.latch == (toggles % 2 == 0 ? Latch::low : Latch::high));
      CHECK((row.valve == Valve::retract_position) == (row.relay == Relay::closed));
      CHECK(row.piston_extension >= 0.0);
      CHECK(row.piston_extension <= spec.stroke);
      CHECK(rad_to_deg(row.transfer_angle) <= 135.0);
      if (k > 0) {
        const double dt = ticks_to_seconds(row.time - rows[k - 1].time);
        CHECK(std::abs(row.piston_extension - rows[k - 1].piston_extension) <= vmax * dt + 1e-12);
      }
    }
    CHECK(std::abs(r.summary.max_transfer_angle_deg - 120.0) <= 0.1);
  }
}

TEST_CASE("run_simulation: determinism") {
  const SimTrace t = two_pulse();
  const std::string a = csv(simulate(t).trajectory);
  const std::string b = csv(simulate(t).trajectory);
  CHECK(a == b);
  CHECK(a.rfind("time_s,latch,relay,valve,piston_extension_m,elbow_angle_deg,transfer_angle_deg,load_height_m,force_margin\n", 0) == 0);
}

TEST_CASE("run_simulation: empty trace holds the initial state") {
  const SimResult r = simulate(SimTrace{}, LoadCase{}, 3.0);
  REQUIRE(r.trajectory.rows.size() == 301);
  for (const auto& row : r.trajectory.rows) {
    CHECK(row.latch == Latch::low);
    CHECK(row.valve == Valve::extend_position);
    CHECK(row.piston_extension == r.trajectory.rows.front().piston_extension);
    CHECK(row.elbow_angle == r.trajectory.rows.front().elbow_angle);
  }
  CHECK(r.summary.lifts == 0);
}

TEST_CASE("run_simulation: stuck sensor and manual switch") {
  SimTrace t;
  t.events = {sound(0.0, 0.0), fault(0.5, FaultKind::sensor_stuck)};
  pulse(t, 1.0);
  t.events.push_back(press(3.0));
  const SimResult r = simulate(t, LoadCase{}, 6.0);
  CHECK(r.summary.detections == 1);
  CHECK(r.summary.rejected_events == 1);
  CHECK(r.summary.accepted_toggles == 1);
  CHECK(r.log.latch_transitions == std::vector<Ticks>{milliseconds(3000)});
  CHECK(r.summary.lifts == 1);
}

TEST_CASE("run_simulation: closely spaced pulses give one detection") {
  SimTrace t;
  t.events = {sound(0.0, 0.0)};
  pulse(t, 1.0);
  t.events.push_back(sound(1.1, 0.8));
  t.events.push_back(sound(1.15, 0.1));
  const SimResult r = simulate(t, LoadCase{}, 4.0);
  CHECK(r.summary.detections == 1);
  CHECK(r.log.latch_transitions.size() == 1);
}

TEST_CASE("run_simulation: tenfold overload stalls") {
  const SimResult r = simulate(two_pulse(), LoadCase{100.0, 9.81});
  CHECK(r.summary.stalls >= 1);
  CHECK(r.summary.lifts == 0);
  CHECK_FALSE(r.summary.pass());
  REQUIRE_FALSE(r.log.stall_onsets.empty());
  CHECK(r.log.stall_onsets.front() == milliseconds(1010));
  for (const auto& row : r.trajectory.rows) CHECK(row.piston_extension == CylinderSpec{}.stroke);
  CHECK(energy_audit(r.trajectory, ArmGeometry{}, LoadCase{100.0, 9.81}).potential_energy == 0.0);
}

TEST_CASE("run_simulation: inconsistent inputs are rejected") {
  CylinderSpec short_stroke = reference_cylinder();
  short_stroke.stroke = 0.100;
  CHECK_THROWS_AS(run_simulation(ArmGeometry{}, LoadCase{}, short_stroke, ControlConfig{}, two_pulse(), options(10.0)),
                  ConfigInconsistency);
  CHECK_THROWS_AS(simulate(two_pulse(), LoadCase{}, 5.0), ConfigInconsistency);
  SimOptions o = options(10.0);
  o.sweep.max = deg_to_rad(110.0);
  CHECK_THROWS_AS(run_simulation(ArmGeometry{}, LoadCase{}, reference_cylinder(), ControlConfig{}, two_pulse(), o),
                  ConfigInconsistency);
  SimTrace backwards;
  backwards.events = {sound(2.0, 0.1), sound(1.0, 0.1)};
  CHECK_THROWS_AS(simulate(backwards), DomainError);
}

TEST_CASE("energy_audit") {
  SUBCASE("lift work covers the potential energy") {
    const SimResult r = simulate(two_pulse());
    REQUIRE(r.lifts.size() == 1);
    const Ticks end = seconds_to_ticks(r.lifts[0].end_s) + r.trajectory.sample_step;
    const EnergyAudit e = energy_audit(r.trajectory.window(r.lifts[0].start, end), ArmGeometry{}, LoadCase{});
    CHECK(e.potential_energy > 0.0);
    CHECK(e.piston_work > e.potential_energy);
  }
  SUBCASE("zero mass") {
    const SimResult r = simulate(two_pulse(), LoadCase{0.0, 9.81});
    const EnergyAudit e = energy_audit(r.trajectory, ArmGeometry{}, LoadCase{0.0, 9.81});
    CHECK(e.piston_work == 0.0);
    CHECK(e.potential_energy == 0.0);
  }
}

TEST_CASE("trace CSV parsing") {
  std::istringstream ok(
      "time_s,channel,value\n0.0,sound_level,0.05\n1.0,sound_level,0.82\n2.0,manual_switch,1\n"
      "3.0,fault,sensor_stuck\n4.0,fault_injection,none\n");
  const SimTrace t = parse_trace_csv(ok);
  REQUIRE(t.events.size() == 5);
  CHECK(t.events[1].time == milliseconds(1000));
  CHECK(t.events[2].channel == Channel::manual_switch);
  CHECK(t.events[3].fault == FaultKind::sensor_stuck);
  CHECK(t.events[4].channel == Channel::fault);
  CHECK(t.end_time() == milliseconds(4000));

  std::istringstream no_header("0.0,sound_level,0.1\n");
  CHECK_THROWS_AS(parse_trace_csv(no_header), ParseError);
  std::istringstream bad_channel("time_s,channel,value\n0.0,whistle,0.1\n");
  CHECK_THROWS_AS(parse_trace_csv(bad_channel), ParseError);
  std::istringstream bad_number("time_s,channel,value\nabc,sound_level,0.1\n");
  CHECK_THROWS_AS(parse_trace_csv(bad_number), ParseError);
  std::istringstream short_row("time_s,channel,value\n0.0,sound_level\n");
  CHECK_THROWS_AS(parse_trace_csv(short_row), ParseError);
  CHECK_THROWS_AS(load_trace_csv("/nonexistent/trace.csv"), ParseError);
}
