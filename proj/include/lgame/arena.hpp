#pragma once

#include <cstdint>
#include <string>

#include "lgame/game.hpp"
#include "lgame/neural.hpp"
#include "lgame/solver.hpp"

namespace lgame::arena {

struct AgentHandle {
    enum class Kind : uint8_t { Random, Perfect, Dqn } kind = Kind::Random;
    const solver::SolveTable* table = nullptr;  // Perfect
    const nn::Network* net = nullptr;           // Dqn
    float epsilon = 0.0f;                       // Dqn

    static AgentHandle random() { return {Kind::Random, nullptr, nullptr, 0}; }
    static AgentHandle perfect(const solver::SolveTable& t) { return {Kind::Perfect, &t, nullptr, 0}; }
    static AgentHandle dqn(const nn::Network& n, float eps) { return {Kind::Dqn, nullptr, &n, eps}; }
};

struct MatchResult {
    long games = 0;
    long wins_first = 0, wins_second = 0, draws = 0;
    long wins_first_as_p1 = 0, wins_first_as_p2 = 0;
    long games_first_as_p1 = 0, games_first_as_p2 = 0;
    double mean_length = 0;  // turns per game
};

// Plays `games` games, alternating which agent moves first. Games over
// draw_turn_cap turns are draws. Deterministic per seed and independent of
// thread count (per-game derived RNG streams, order-independent aggregation).
// Throws std::logic_error if a Perfect agent ever loses.
MatchResult play_match(const AgentHandle& first, const AgentHandle& second, long games,
                       int draw_turn_cap, uint64_t seed, int threads = 1);

struct ValidationRates {
    double win_vs_random = 0, draw_vs_random = 0, loss_vs_random = 0;
    double win_vs_perfect = 0, draw_vs_perfect = 0, loss_vs_perfect = 0;
};

// The periodic validation protocol: games_per_opponent games against Random and
// against Perfect with the agent at the given epsilon.
ValidationRates validate(const nn::Network& net, const solver::SolveTable& table,
                         long games_per_opponent, float epsilon, uint64_t seed, int threads = 1);

struct FinalReport {
    MatchResult vs_random;   // 10000 games
    MatchResult vs_perfect;  // 1000 games
    ValidationRates rates;
    std::string text;        // human-readable summary
    std::string machine;     // curve-file field layout
};

FinalReport final_evaluation(const nn::Network& net, const solver::SolveTable& table, uint64_t seed,
                             float epsilon = 0.01f, long games_vs_random = 10000,
                             long games_vs_perfect = 1000, int threads = 1);

}  // namespace lgame::arena
