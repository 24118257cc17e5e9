#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "capnav/dynamics.hpp"
#include "capnav/locomotion.hpp"

namespace capnav {

enum class SessionMode { in_flow, rolling };
enum class SessionStatus { paused, running, finished, error };

std::string_view to_string(SessionMode m);
std::string_view to_string(SessionStatus s);
SessionMode parse_session_mode(std::string_view text);
SessionStatus parse_session_status(std::string_view text);

struct SessionScenario {
    std::string name = "reference";
    SessionMode mode = SessionMode::in_flow;
    GeometryParams geometry;
    FluidProperties fluid;
    CapsuleSpec capsule;
    DynamicsConfig dynamics;
    double mean_velocity = 0.65;   // m s^-1
    double split_fraction = 0.5;
    double power_law_exponent = 7.0;
    int entrance_count = 20;
    int entrance_index = 0;        // 0 = channel axis
    CapabilityEnvelope envelope;
    DissolutionModel dissolution = default_dissolution_model();
    RollingModel rolling;

    /// Y-junction run at the slowest design velocity (0.65 m/s).
    static SessionScenario reference();
    /// Capsule rolling on the floor of the 6.3 mm tube, no flow.
    static SessionScenario rolling_tube();
    void validate() const;
};

/// Operator command. In rolling mode `direction` is the heading (projected
/// onto the horizontal plane) and `rotation_frequency` drives the rolling
/// kinematics; in in-flow mode the rotation frequency is ignored.
struct SessionCommand {
    double field = 0.0;                  // T
    Vec3 direction = Vec3::UnitX();
    Vec3 gradient = Vec3::Zero();        // T m^-1
    bool amf_on = false;
    double rotation_frequency = 0.0;     // Hz
};

struct Snapshot {
    std::uint64_t seq = 0;
    CapsuleState state;
    SessionStatus status = SessionStatus::paused;
    std::optional<Outcome> outcome;
};

class SessionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * One steerable capsule. Commands are clamped to the capability envelope on
 * arrival and take effect at the start of the next advance; advance(wall_dt)
 * simulates wall_dt / time_dilation seconds of physical time.
 */
class Session {
  public:
    Session(std::string id, SessionScenario scenario, double time_dilation);

    const std::string& id() const { return id_; }
    const SessionScenario& scenario() const { return scenario_; }
    double time_dilation() const { return dilation_; }
    SessionStatus status() const { return status_; }
    const CapsuleState& state() const { return state_; }
    std::optional<Outcome> outcome() const { return outcome_; }
    const std::string& error_message() const { return error_; }
    /// The command currently acting on the capsule.
    const SessionCommand& active_command() const { return active_; }

    /// Returns the acknowledged (clamped) command.
    SessionCommand apply_command(const SessionCommand& request);
    void set_running(bool running);
    const CapsuleState& advance(double wall_dt);

    /// Current state stamped with the next sequence number.
    Snapshot snapshot();

  private:
    void step_in_flow(double dt);
    void step_rolling(double dt);
    void finish(Outcome outcome);

    std::string id_;
    SessionScenario scenario_;
    double dilation_;
    Geometry geometry_;
    FlowField flow_;
    ThermalState thermal_;
    SessionCommand active_;
    std::optional<SessionCommand> pending_;
    UniformMagnetics magnetics_;
    CapsuleState state_;
    SessionStatus status_ = SessionStatus::paused;
    std::optional<Outcome> outcome_;
    std::string error_;
    std::uint64_t seq_ = 0;
    CollisionStats stats_;
};

std::unique_ptr<Session> create_session(const std::string& id, const SessionScenario& scenario,
                                        double time_dilation);

/// Fan-out of snapshots to any number of readers. Each subscriber owns an
/// unbounded queue, so nothing is dropped; a new subscriber first receives
/// the latest published snapshot.
class SnapshotBroadcaster {
  public:
    class Subscription {
      public:
        /// Blocks until a snapshot is available or the stream is closed and drained.
        std::optional<Snapshot> pop();
        std::optional<Snapshot> try_pop();

      private:
        friend class SnapshotBroadcaster;
        std::mutex mutex_;
        std::condition_variable ready_;
        std::deque<Snapshot> queue_;
        bool closed_ = false;
    };

    std::shared_ptr<Subscription> subscribe();
    void publish(const Snapshot& snapshot);
    void close();

  private:
    std::mutex mutex_;
    std::vector<std::weak_ptr<Subscription>> subscribers_;
    std::optional<Snapshot> latest_;
    bool closed_ = false;
};

inline constexpr double kMaxSnapshotRate = 120.0;  // Hz

}  // namespace capnav
