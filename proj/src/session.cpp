#include "capnav/session.hpp"

#include <algorithm>
#include <cmath>

namespace capnav {

namespace {

constexpr double kRollingStep = 1e-3;  // s

FlowField make_flow(const Geometry& geometry, const SessionScenario& s) {
    const auto profile = VelocityProfile::for_reynolds(
        reynolds(s.fluid, s.mean_velocity, geometry.diameter()), s.power_law_exponent);
    return FlowField::analytic(geometry, s.mean_velocity, profile, s.split_fraction);
}

UniformMagnetics make_magnetics(const SessionCommand& c) {
    return uniform_command(c.direction, c.field, c.gradient);
}

}  // namespace

std::string_view to_string(SessionMode m) { return m == SessionMode::in_flow ? "in_flow" : "rolling"; }

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::paused: return "paused";
        case SessionStatus::running: return "running";
        case SessionStatus::finished: return "finished";
        case SessionStatus::error: return "error";
    }
    return "error";
}

SessionMode parse_session_mode(std::string_view text) {
    if (text == "in_flow") return SessionMode::in_flow;
    if (text == "rolling") return SessionMode::rolling;
    throw InvalidParameter("unknown session mode '" + std::string(text) + "'");
}

SessionStatus parse_session_status(std::string_view text) {
    for (auto s : {SessionStatus::paused, SessionStatus::running, SessionStatus::finished,
                   SessionStatus::error}) {
        if (to_string(s) == text) return s;
    }
    throw InvalidParameter("unknown session status '" + std::string(text) + "'");
}

SessionScenario SessionScenario::reference() { return {}; }

SessionScenario SessionScenario::rolling_tube() {
    SessionScenario s;
    s.name = "rolling_tube";
    s.mode = SessionMode::rolling;
    s.geometry.kind = GeometryKind::tube;
    s.geometry.main_length = 0.1;
    s.geometry.diameter = 6.3e-3;
    s.mean_velocity = 0.0;
    return s;
}

void SessionScenario::validate() const {
    fluid.validate();
    capsule.validate();
    dynamics.validate();
    envelope.validate();
    dissolution.validate();
    rolling.validate();
    if (!(mean_velocity >= 0.0)) throw InvalidParameter("scenario: mean velocity must be >= 0");
    if (entrance_index < 0 || entrance_index >= entrance_count) {
        throw InvalidParameter("scenario: entrance_index outside [0, entrance_count)");
    }
}

Session::Session(std::string id, SessionScenario scenario, double time_dilation)
    : id_(std::move(id)),
      scenario_((scenario.validate(), std::move(scenario))),
      dilation_(time_dilation),
      geometry_(scenario_.geometry),
      flow_(make_flow(geometry_, scenario_)),
      thermal_(scenario_.dissolution),
      magnetics_(make_magnetics(active_)) {
    if (!(time_dilation >= 1.0) || !std::isfinite(time_dilation)) {
        throw InvalidParameter("session: time dilation must be >= 1");
    }
    if (scenario_.mode == SessionMode::rolling) {
        state_.position = Vec3(0.0, 0.0, -(geometry_.radius() - scenario_.capsule.radius()));
        state_.velocity = Vec3::Zero();
    } else {
        const auto entrances =
            geometry_.entrance_positions(scenario_.entrance_count, scenario_.capsule.radius());
        state_.position = entrances.positions[static_cast<std::size_t>(scenario_.entrance_index)];
        state_.velocity = flow_.sample(state_.position);
    }
    state_.region = geometry_.classify(state_.position);
}

SessionCommand Session::apply_command(const SessionCommand& request) {
    if (status_ == SessionStatus::finished || status_ == SessionStatus::error) {
        throw SessionError("session " + id_ + " is no longer accepting commands");
    }
    const FieldCommand clamped = clamp_command(
        scenario_.envelope, FieldCommand{request.field, request.direction, request.gradient});
    SessionCommand ack = request;
    ack.field = clamped.field;
    ack.direction = clamped.direction;
    ack.gradient = clamped.gradient;
    ack.rotation_frequency = std::max(0.0, request.rotation_frequency);
    pending_ = ack;
    return ack;
}

void Session::set_running(bool running) {
    if (status_ == SessionStatus::paused || status_ == SessionStatus::running) {
        status_ = running ? SessionStatus::running : SessionStatus::paused;
    }
}

void Session::finish(Outcome outcome) {
    outcome_ = outcome;
    status_ = SessionStatus::finished;
}

void Session::step_in_flow(double dt) {
    const Environment env{geometry_, flow_, magnetics_, scenario_.fluid, scenario_.dynamics};
    state_ = step(scenario_.capsule, env, state_, dt, &stats_);
}

void Session::step_rolling(double dt) {
    Vec3 heading(active_.direction.x(), active_.direction.y(), 0.0);
    const double n = heading.norm();
    const double speed = n > 0.0 ? rolling_velocity(scenario_.rolling, scenario_.capsule.diameter,
                                                    active_.rotation_frequency)
                                 : 0.0;
    CapsuleState next = state_;
    next.time = state_.time + dt;
    next.velocity = n > 0.0 ? Vec3(speed * heading / n) : Vec3::Zero();
    next.position = state_.position + next.velocity * dt;
    next = reflect_collision(geometry_, scenario_.capsule, next, 1.0, &stats_);
    next.region = geometry_.classify(next.position);
    state_ = next;
}

const CapsuleState& Session::advance(double wall_dt) {
    if (!(wall_dt >= 0.0)) throw InvalidParameter("session: wall_dt must be >= 0");
    if (pending_) {
        active_ = *pending_;
        pending_.reset();
        magnetics_ = make_magnetics(active_);
    }
    if (status_ != SessionStatus::running || wall_dt == 0.0) return state_;

    double remaining = wall_dt / dilation_;
    try {
        while (remaining > 0.0 && status_ == SessionStatus::running) {
            double dt = scenario_.mode == SessionMode::rolling
                            ? kRollingStep
                            : adaptive_dt(state_, flow_.sample(state_.position), scenario_.dynamics);
            dt = std::min(dt, remaining);
            if (scenario_.mode == SessionMode::rolling) step_rolling(dt);
            else step_in_flow(dt);
            remaining -= dt;
            thermal_.advance(dt, active_.amf_on);
            state_.dissolved_fraction = thermal_.dissolved_fraction();
            if (state_.region == Region::exited_a) finish(Outcome::exited_a);
            else if (state_.region == Region::exited_b) finish(Outcome::exited_b);
            else if (state_.dissolved_fraction >= 1.0) finish(Outcome::dissolved);
        }
    } catch (const NumericalFailure& e) {
        state_ = e.last_valid_state();
        status_ = SessionStatus::error;
        outcome_ = Outcome::failed;
        error_ = e.what();
    } catch (const OutOfDomain& e) {
        status_ = SessionStatus::error;
        outcome_ = Outcome::failed;
        error_ = e.what();
    }
    return state_;
}

Snapshot Session::snapshot() {
    Snapshot s;
    s.seq = seq_++;
    s.state = state_;
    s.status = status_;
    s.outcome = outcome_;
    return s;
}

std::unique_ptr<Session> create_session(const std::string& id, const SessionScenario& scenario,
                                        double time_dilation) {
    return std::make_unique<Session>(id, scenario, time_dilation);
}

std::shared_ptr<SnapshotBroadcaster::Subscription> SnapshotBroadcaster::subscribe() {
    auto sub = std::make_shared<Subscription>();
    std::lock_guard lock(mutex_);
    if (latest_) sub->queue_.push_back(*latest_);
    sub->closed_ = closed_;
    if (!closed_) subscribers_.push_back(sub);
    return sub;
}

void SnapshotBroadcaster::publish(const Snapshot& snapshot) {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    latest_ = snapshot;
    auto it = subscribers_.begin();
    while (it != subscribers_.end()) {
        if (auto sub = it->lock()) {
            {
                std::lock_guard sub_lock(sub->mutex_);
                sub->queue_.push_back(snapshot);
            }
            sub->ready_.notify_one();
            ++it;
        } else {
            it = subscribers_.erase(it);
        }
    }
}

void SnapshotBroadcaster::close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    for (auto& weak : subscribers_) {
        if (auto sub = weak.lock()) {
            {
                std::lock_guard sub_lock(sub->mutex_);
                sub->closed_ = true;
            }
            sub->ready_.notify_all();
        }
    }
    subscribers_.clear();
}

std::optional<Snapshot> SnapshotBroadcaster::Subscription::pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    Snapshot s = std::move(queue_.front());
    queue_.pop_front();
    return s;
}

std::optional<Snapshot> SnapshotBroadcaster::Subscription::try_pop() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) return std::nullopt;
    Snapshot s = std::move(queue_.front());
    queue_.pop_front();
    return s;
}

}  // namespace capnav
