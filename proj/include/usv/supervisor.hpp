#pragma once

// Performance-based supervisory switching.
//
// Every control step each candidate is rolled out K steps ahead from the
// measured plant state, on its own reduced model and allocation path. The
// accumulated quadratic pose error V_q is blended with a forgetting-weighted
// history into mu_q, and the switching logic picks argmin mu_q subject to a
// relative hysteresis h.

#include "usv/controller.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace usv {

struct SupervisorConfig {
    int K = 50;    // future window, steps
    int L = 100;   // past window, steps
    double alpha_w = 1.0;
    double beta_w = 1.0;
    double forget = 0.95;
    double h = 0.2;
    Mat3 P = Vec3(1.0, 1.0, 10.0).asDiagonal();

    void validate() const {
        if (K < 1) throw ConfigError("supervisor: K must be >= 1");
        if (L < 0) throw ConfigError("supervisor: L must be >= 0");
        if (!(alpha_w > 0.0) || !(beta_w > 0.0)) throw ConfigError("supervisor: alpha and beta must be positive");
        if (!(forget >= 0.0 && forget <= 1.0)) throw ConfigError("supervisor: forgetting factor must be in [0, 1]");
        if (!(h > 0.0)) throw ConfigError("supervisor: hysteresis h must be positive");
        Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (P + P.transpose()));
        if (!(es.eigenvalues().minCoeff() > 0.0)) throw ConfigError("supervisor: P must be positive definite");
    }
};

inline constexpr double kFalsified = std::numeric_limits<double>::infinity();

/// v = 1/2 e' P e
inline double lyapunov_value(const Vec3& e, const Mat3& P) { return 0.5 * e.dot(P * e); }

/// V_q over the next K steps. The candidate is taken by value so the rollout
/// never touches the live controller. Divergence returns kFalsified.
inline double estimate_performance(Candidate candidate, const VehicleState& y, const ReferenceTrajectory& traj,
                                   int K, const Mat3& P, double dt, const VehicleParams& params,
                                   const Allocator& allocator) {
    if (!y.finite()) return kFalsified;
    VehicleState s = y;
    double V = 0.0;
    try {
        for (int k = 0; k < K; ++k) {
            const SampleView ref = sample(traj, s.t);
            const ControlOutput out = compute(candidate.controller, s, ref, dt);
            if (!out.tau.allFinite()) return kFalsified;
            const Vec3 tau = allocator.wrench(allocator.allocate(candidate.path, out));
            s = step(params, candidate.model, s, tau, Vec3::Zero(), dt);
            const Vec3 e = pose_error(s.eta(), sample(traj, s.t).current.eta);
            V += lyapunov_value(e, P);
        }
    } catch (const IntegrationBlowup&) {
        return kFalsified;
    }
    return std::isfinite(V) ? V : kFalsified;
}

/// mu = alpha V_now + beta sum_j forget^j V_{j steps ago}; `history[0]` is
/// the value from one step ago.
inline double performance_signal(double V_current, const std::deque<double>& history, const SupervisorConfig& cfg) {
    double past = 0.0;
    double w = 1.0;
    for (double V : history) {
        w *= cfg.forget;
        if (w == 0.0) break;
        past += w * V;
    }
    return cfg.alpha_w * V_current + cfg.beta_w * past;
}

/// Hysteretic argmin. Ties in the argmin go to sigma_prev, then the lowest id.
inline int select_controller(const std::map<int, double>& mu, int sigma_prev, double h) {
    if (mu.empty()) throw SupervisorFailure("select_controller: empty candidate set");
    int best = mu.begin()->first;
    double best_mu = mu.begin()->second;
    for (const auto& [id, value] : mu) {
        if (value < best_mu) {
            best = id;
            best_mu = value;
        }
    }
    const auto prev = mu.find(sigma_prev);
    if (prev == mu.end()) return best;
    if (prev->second == best_mu) return sigma_prev;
    return (1.0 + h) * best_mu <= prev->second ? best : sigma_prev;
}

struct SupervisorStep {
    int sigma = 0;
    ControlOutput output;
    AllocationPath path = AllocationPath::Underactuated;
    std::map<int, double> V;
    std::map<int, double> mu;
    bool failed = false;
};

struct SupervisorState {
    std::optional<int> sigma;
    std::map<int, std::deque<double>> history;
    std::map<int, double> last_mu;
};

class Supervisor {
public:
    Supervisor(std::vector<Candidate> candidates, SupervisorConfig cfg, VehicleParams params, Allocator allocator)
        : candidates_(std::move(candidates)), cfg_(cfg), params_(std::move(params)), allocator_(std::move(allocator)) {
        cfg_.validate();
        if (candidates_.empty()) throw ConfigError("supervisor: empty candidate set");
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates_.size(); ++j) {
                if (candidates_[i].id == candidates_[j].id) throw ConfigError("supervisor: duplicate candidate id");
            }
        }
    }

    /// Pins sigma to one candidate while still running the estimator.
    void pin(std::optional<int> id) { pinned_ = id; }

    SupervisorStep step(const VehicleState& y, const ReferenceTrajectory& traj, double dt) {
        SupervisorStep out;
        // Candidates are independent; iterate in id order so the merge is deterministic.
        for (const auto& c : candidates_) {
            out.V[c.id] = estimate_performance(c, y, traj, cfg_.K, cfg_.P, dt, params_, allocator_);
        }
        bool all_falsified = true;
        for (const auto& c : candidates_) {
            auto& hist = state_.history[c.id];
            const double V = out.V[c.id];
            out.mu[c.id] = performance_signal(V, hist, cfg_);
            if (std::isfinite(out.mu[c.id])) all_falsified = false;
            hist.push_front(V);
            while (hist.size() > static_cast<std::size_t>(cfg_.L)) hist.pop_back();
        }
        state_.last_mu = out.mu;

        int sigma;
        if (pinned_) {
            sigma = *pinned_;
        } else if (!state_.sigma) {
            sigma = out.mu.begin()->first;
            for (const auto& [id, m] : out.mu) {
                if (m < out.mu.at(sigma)) sigma = id;
            }
        } else {
            sigma = select_controller(out.mu, *state_.sigma, cfg_.h);
        }
        state_.sigma = sigma;
        out.sigma = sigma;

        // Every live controller observes the plant so its step memory stays current.
        for (auto& c : candidates_) {
            const ControlOutput o = compute(c.controller, y, sample(traj, y.t), dt);
            if (c.id == sigma) {
                out.output = o;
                out.path = c.path;
            }
        }
        if (all_falsified) {
            out.failed = true;
            out.output = ControlOutput{};
        }
        return out;
    }

    const SupervisorState& state() const { return state_; }
    const std::vector<Candidate>& candidates() const { return candidates_; }
    const SupervisorConfig& config() const { return cfg_; }

private:
    std::vector<Candidate> candidates_;
    SupervisorConfig cfg_;
    VehicleParams params_;
    Allocator allocator_;
    SupervisorState state_;
    std::optional<int> pinned_;
};

}  // namespace usv
