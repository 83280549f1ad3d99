#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "lgame/game.hpp"
#include "lgame/neural.hpp"
#include "lgame/solver.hpp"

namespace lgame::trainer {

// One played turn. Inputs and the next-state legality mask are derived views of the
// stored states: input() is the mover's perspective before the turn, next_input()
// the opponent's perspective after it.
struct Transition {
    GameState before;
    GameState after;
    uint8_t action = 0;   // L placement code; the neutral phase is not a learned output
    int8_t reward = 0;    // -1, 0, +1; nonzero only on terminal transitions
    bool terminal = false;

    std::array<float, 16> input() const { return encode_for_network(before); }
    std::array<float, 16> next_input() const { return encode_for_network(after); }
    std::array<bool, kNumActionCodes> next_mask() const { return legal_action_mask(after); }
};

enum class GameOutcome : uint8_t { AWins, BWins, Draw };

struct GameRecord {
    std::vector<Transition> transitions;
    GameOutcome outcome = GameOutcome::Draw;
};

// Ring buffer of whole games; eviction is strictly oldest-first.
class ReplayMemory {
  public:
    explicit ReplayMemory(size_t games_capacity) : capacity_(games_capacity) {}

    void push_game(GameRecord record);
    size_t size() const { return games_.size(); }
    size_t capacity() const { return capacity_; }
    size_t evicted() const { return evicted_; }
    size_t total_transitions() const { return total_transitions_; }
    const GameRecord& game(size_t i) const { return games_[i]; }  // i in insertion order

    const GameRecord& sample_game(std::mt19937_64& rng) const;
    const Transition& sample_transition(std::mt19937_64& rng) const;

  private:
    std::deque<GameRecord> games_;
    size_t capacity_;
    size_t evicted_ = 0;
    size_t total_transitions_ = 0;
};

enum class BatchMode : uint8_t { VariableGame, Fixed32 };

struct TrainerConfig {
    long total_games = 100000;
    float gamma = 0.9f;
    float epsilon_start = 0.05f;
    float epsilon_end = 0.01f;
    int replay_sample_n = 10;  // N = 0: no replay memory, train on the just-played game
    BatchMode batch_mode = BatchMode::VariableGame;
    nn::OptimizerConfig optimizer;
    long validate_every = 1000;
    long validate_games = 1000;
    int draw_turn_cap = 100;
    size_t memory_capacity = 10000;
    uint64_t seed = 1;
    // Experimental ablation flags, both off by default.
    bool use_target_network = false;
    long target_sync_every = 1000;
    bool merge_samples = false;  // one merged batch per recall instead of one per game
};

struct CurveRecord {
    long episode = 0;
    float epsilon = 0;
    float learning_rate = 0;
    double mean_loss = 0;
    double win_vs_random = 0, draw_vs_random = 0, loss_vs_random = 0;
    double win_vs_perfect = 0, draw_vs_perfect = 0, loss_vs_perfect = 0;
};

std::string curve_csv_header();
std::string curve_csv_row(const CurveRecord& r);

// epsilon-greedy compound turn selection; greedy placement by masked argmax (ties ->
// lowest code), greedy neutral by minimizing the opponent's best masked Q in the
// resulting state (empty mask counts as -1, ties -> lowest neutral code).
Turn select_turn(const nn::Network& net, const GameState& s, float epsilon, std::mt19937_64& rng);

GameRecord play_self_game(const nn::Network& net, float epsilon, std::mt19937_64& rng,
                          int draw_turn_cap);

struct TargetBatch {
    nn::Network::Mat inputs;
    std::vector<int> actions;
    nn::Network::Vec targets;
};

// Negamax Q-targets: y = reward for terminal transitions, otherwise
// y = -gamma * max over legal next actions of Q(next_input).
TargetBatch compute_targets(const nn::Network& net, const GameRecord& record, float gamma);

struct StepStats {
    std::vector<float> losses;
    size_t memory_samples = 0;  // games drawn from the replay memory
};

// bootstrap, when non-null, is the (frozen) network used for target computation.
StepStats train_step_variable(nn::Network& net, nn::OptimizerState& opt, const ReplayMemory& memory,
                              int n_samples, float gamma, const nn::OptimizerConfig& ocfg,
                              float lr_scale, std::mt19937_64& rng, bool merge_samples = false,
                              const nn::Network* bootstrap = nullptr);

StepStats train_step_fixed32(nn::Network& net, nn::OptimizerState& opt, const ReplayMemory& memory,
                             float gamma, const nn::OptimizerConfig& ocfg, float lr_scale,
                             std::mt19937_64& rng, const nn::Network* bootstrap = nullptr);

struct Schedule {
    float epsilon;
    float lr_scale;  // multiplier on the optimizer's base learning rate
};
Schedule schedules(long episode_index, const TrainerConfig& cfg);

struct TrainingResult {
    nn::Network net;
    std::vector<CurveRecord> curve;
};

// Full self-play training loop. When out_dir is non-empty, writes curve.csv and
// checkpoints (last 5 plus best-by-win-rate) there. progress_prefix, when non-empty,
// enables one progress line per validation on stderr.
TrainingResult run_training(const TrainerConfig& cfg, const solver::SolveTable& table,
                            const std::string& out_dir = "", const std::string& progress_prefix = "");

uint64_t mix_seed(uint64_t a, uint64_t b = 0, uint64_t c = 0);

}  // namespace lgame::trainer
