#pragma once

// Multi-step mutation decision processes. One environment serves both the
// kinase regime (full mask over mutable sites, terminal-only reward,
// position_threshold 0) and the antibody regime (CDR mask, per-step reward,
// thresholded position selection) via configuration.

#include <seqrl/rewards.hpp>
#include <seqrl/rl.hpp>

namespace seqrl {

/// Linear interpolation from start to end over horizon_steps, constant at
/// `end` beyond the horizon.
struct AnnealSchedule {
    double start = 1.0;
    double end = 0.5;
    int horizon_steps = 1000;

    double at(int step) const {
        if (step <= 0) return start;
        if (step >= horizon_steps) return end;
        return start + (end - start) * static_cast<double>(step) /
                           static_cast<double>(horizon_steps);
    }
};

enum class RewardMode { per_step, terminal_only };

struct EnvStepResult {
    Sequence next;
    double reward = 0.0;
    bool done = false;
};

/// Mutation MDP: episodes start at a pool sequence, each step substitutes
/// one residue at a masked position (the current residue is excluded), and
/// the episode ends at max_steps or, optionally, on the first fitness
/// improvement over the starting baseline.
class MutationEnv {
public:
    MutationEnv(std::vector<Sequence> wild_type_pool, BoolMask mask, int max_steps,
                RewardFn reward, RewardMode reward_mode = RewardMode::per_step,
                bool terminate_on_improvement = false, double position_threshold = 0.5)
        : pool_(std::move(wild_type_pool)), mask_(std::move(mask)), max_steps_(max_steps),
          reward_(std::move(reward)), reward_mode_(reward_mode),
          terminate_on_improvement_(terminate_on_improvement),
          position_threshold_(position_threshold) {
        require<InvalidConfig>(!pool_.empty(), "wild-type pool must not be empty");
        require<InvalidConfig>(max_steps_ >= 1, "max_steps must be >= 1");
        const int length = pool_.front().length();
        require<InvalidConfig>(static_cast<int>(mask_.size()) == length,
                               "mask length must equal sequence length");
        bool any = false;
        for (bool b : mask_) any = any || b;
        require<InvalidConfig>(any, "mask must have at least one mutable position");
        for (const auto& s : pool_)
            require<InvalidConfig>(s.length() == length, "pool sequences must share one length");
    }

    const BoolMask& mask() const { return mask_; }
    int max_steps() const { return max_steps_; }
    int length() const { return pool_.front().length(); }
    const std::vector<Sequence>& pool() const { return pool_; }
    double position_threshold() const { return position_threshold_; }
    RewardMode reward_mode() const { return reward_mode_; }
    bool terminate_on_improvement() const { return terminate_on_improvement_; }
    double improvement_baseline() const { return baseline_; }
    double oracle(const Sequence& s) const { return reward_(s); }

    /// Uniform draw of a starting sequence; records the improvement
    /// baseline as its oracle value.
    Sequence reset(RngStream& rng) {
        const int idx = rng.next_below(static_cast<int>(pool_.size()));
        episode_start_ = pool_[static_cast<size_t>(idx)];
        baseline_ = reward_(episode_start_);
        steps_taken_ = 0;
        return episode_start_;
    }

    EnvStepResult step(const Sequence& state, const MutationAction& action) {
        require(state.length() == length(), "state length mismatch");
        require<InvalidAction>(action.position >= 0 && action.position < length(),
                               "action position out of range");
        require<InvalidAction>(mask_[static_cast<size_t>(action.position)],
                               "action position is masked out");
        require<InvalidAction>(action.residue >= 0, "action residue out of range");
        require<InvalidAction>(action.residue != state[action.position],
                               "action must change the residue at its position");

        EnvStepResult out;
        out.next = state;
        out.next[action.position] = action.residue;
        ++steps_taken_;

        const double fitness = reward_(out.next);
        bool done = steps_taken_ >= max_steps_;
        if (terminate_on_improvement_ && fitness > baseline_) done = true;

        out.done = done;
        out.reward = (reward_mode_ == RewardMode::per_step) ? fitness : (done ? fitness : 0.0);
        return out;
    }

private:
    std::vector<Sequence> pool_;
    BoolMask mask_;
    int max_steps_;
    RewardFn reward_;
    RewardMode reward_mode_;
    bool terminate_on_improvement_;
    double position_threshold_;

    Sequence episode_start_;
    double baseline_ = 0.0;
    int steps_taken_ = 0;
};

/// One full episode under the policy, with old log-probs recorded at the
/// annealed temperatures active at global_step. Each step excludes the
/// current residue at the chosen position, so the wild type can never be
/// reintroduced at a site the step touches.
inline Trajectory rollout(MutationEnv& env, const MutationPolicy& policy,
                          const AnnealSchedule& schedule, int global_step, RngStream& rng,
                          const LinearStateValue* value = nullptr) {
    require(policy.length() == env.length(), "policy/environment length mismatch");

    Trajectory traj;
    traj.aa_temperature = schedule.at(global_step);
    traj.pos_temperature = schedule.at(global_step);

    Sequence state = env.reset(rng);
    for (;;) {
        auto step_result = mutate_step(policy, state, state, env.mask(), 1, traj.aa_temperature,
                                       traj.pos_temperature, true, rng, env.position_threshold());
        const MutationAction action = step_result.actions.front();
        EnvStepResult env_step = env.step(state, action);

        traj.states.push_back(state);
        traj.actions.push_back(action);
        traj.log_probs_old.push_back(step_result.log_prob);
        traj.rewards.push_back(env_step.reward);
        traj.values.push_back(value ? value->predict(state) : 0.0);

        state = env_step.next;
        if (env_step.done) {
            traj.final_state = state;
            traj.done = true;
            break;
        }
    }
    traj.check_parallel();
    return traj;
}

/// Stratified seed pool over a variant table: classify annotated variants
/// into the fitness bins (=0, <=1, <=10, >10) and draw up to per_bin
/// sequences from each, in deterministic variant order.
inline std::vector<Sequence> stratified_seed_pool(const TableLandscape& land, int per_bin,
                                                  RngStream& rng) {
    require<InvalidConfig>(per_bin >= 1, "per_bin must be >= 1");
    std::array<std::vector<uint64_t>, 4> bins;
    for (uint64_t key : land.sorted_keys()) {
        const double f = land.value_of_key(key);
        int b;
        if (f == 0.0) b = 0;
        else if (f <= 1.0) b = 1;
        else if (f <= 10.0) b = 2;
        else b = 3;
        bins[static_cast<size_t>(b)].push_back(key);
    }
    std::vector<Sequence> pool;
    for (auto& bin : bins) {
        const int take = std::min<int>(per_bin, static_cast<int>(bin.size()));
        for (int i = 0; i < take; ++i) {
            // Draw without replacement from the remaining suffix.
            const int j = i + rng.next_below(static_cast<int>(bin.size()) - i);
            std::swap(bin[static_cast<size_t>(i)], bin[static_cast<size_t>(j)]);
            pool.push_back(land.sequence_of_key(bin[static_cast<size_t>(i)]));
        }
    }
    require<InvalidConfig>(!pool.empty(), "stratified pool is empty");
    return pool;
}

// ------------------------------------------------------ trajectory log

inline std::string trajectory_log_to_csv(const std::vector<Trajectory>& trajectories,
                                         const Alphabet& alphabet) {
    std::ostringstream out;
    out << "episode,step,state,position,residue,reward,log_prob\n";
    for (size_t e = 0; e < trajectories.size(); ++e) {
        const Trajectory& t = trajectories[e];
        for (int i = 0; i < t.length(); ++i) {
            out << e << ',' << i << ',' << decode(alphabet, t.states[static_cast<size_t>(i)])
                << ',' << t.actions[static_cast<size_t>(i)].position << ','
                << alphabet.symbol(t.actions[static_cast<size_t>(i)].residue) << ','
                << format_double(t.rewards[static_cast<size_t>(i)]) << ','
                << format_double(t.log_probs_old[static_cast<size_t>(i)]) << '\n';
        }
    }
    return out.str();
}

} // namespace seqrl
