#include "lgame/arena.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lgame/trainer.hpp"

namespace lgame::arena {

namespace {

Turn agent_turn(const AgentHandle& agent, const GameState& s, std::mt19937_64& rng) {
    switch (agent.kind) {
        case AgentHandle::Kind::Random: {
            // Two-stage uniform: placement, then one of the 13 neutral options.
            auto placements = legal_l_placements(s);
            std::uniform_int_distribution<size_t> pp(0, placements.size() - 1);
            int code = placements[pp(rng)];
            GameState mid = apply_placement(s, code);
            auto neutrals = legal_neutral_actions(mid);
            std::uniform_int_distribution<size_t> pn(0, neutrals.size() - 1);
            return {code, neutrals[pn(rng)]};
        }
        case AgentHandle::Kind::Perfect:
            return agent.table->perfect_move(s, rng);
        case AgentHandle::Kind::Dqn:
            return trainer::select_turn(*agent.net, s, agent.epsilon, rng);
    }
    throw std::logic_error("unknown agent kind");
}

struct GameOutcome {
    int winner_slot;  // 0 = first agent, 1 = second agent, -1 = draw
    int turns;
};

// One game; slot p1 is whichever agent moves first this game.
GameOutcome play_one(const AgentHandle& p1, const AgentHandle& p2, int draw_turn_cap,
                     uint64_t game_seed) {
    std::mt19937_64 rng1(trainer::mix_seed(game_seed, 101));
    std::mt19937_64 rng2(trainer::mix_seed(game_seed, 202));
    GameState state = start_position();
    for (int t = 0; t < draw_turn_cap; ++t) {
        bool p1_to_move = state.to_move == Player::A;
        Turn turn = p1_to_move ? agent_turn(p1, state, rng1) : agent_turn(p2, state, rng2);
        state = apply_turn(state, turn);
        if (is_loss(state)) return {p1_to_move ? 0 : 1, t + 1};
    }
    return {-1, draw_turn_cap};
}

}  // namespace

MatchResult play_match(const AgentHandle& first, const AgentHandle& second, long games,
                       int draw_turn_cap, uint64_t seed, int threads) {
    if (games < 1) throw std::invalid_argument("play_match needs at least one game");
    MatchResult r;
    r.games = games;

    std::vector<GameOutcome> outcomes;
    outcomes.resize(size_t(games));
    auto run_range = [&](long begin, long step) {
        for (long i = begin; i < games; i += step) {
            bool first_is_p1 = (i % 2 == 0);
            const AgentHandle& p1 = first_is_p1 ? first : second;
            const AgentHandle& p2 = first_is_p1 ? second : first;
            outcomes[size_t(i)] = play_one(p1, p2, draw_turn_cap, trainer::mix_seed(seed, 7, uint64_t(i)));
        }
    };
    if (threads <= 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(run_range, t, threads);
        for (auto& t : pool) t.join();
    }

    long total_turns = 0;
    for (long i = 0; i < games; ++i) {
        bool first_is_p1 = (i % 2 == 0);
        const GameOutcome& g = outcomes[size_t(i)];
        total_turns += g.turns;
        (first_is_p1 ? r.games_first_as_p1 : r.games_first_as_p2)++;
        int winner_agent = g.winner_slot < 0 ? -1 : (g.winner_slot == 0) == first_is_p1 ? 0 : 1;
        if (winner_agent == 0) {
            ++r.wins_first;
            (first_is_p1 ? r.wins_first_as_p1 : r.wins_first_as_p2)++;
            if (second.kind == AgentHandle::Kind::Perfect)
                throw std::logic_error("perfect agent lost a game");
        } else if (winner_agent == 1) {
            ++r.wins_second;
            if (first.kind == AgentHandle::Kind::Perfect)
                throw std::logic_error("perfect agent lost a game");
        } else {
            ++r.draws;
        }
    }
    r.mean_length = double(total_turns) / double(games);
    return r;
}

ValidationRates validate(const nn::Network& net, const solver::SolveTable& table,
                         long games_per_opponent, float epsilon, uint64_t seed, int threads) {
    AgentHandle agent = AgentHandle::dqn(net, epsilon);
    MatchResult vs_r = play_match(agent, AgentHandle::random(), games_per_opponent, 100,
                                  trainer::mix_seed(seed, 1), threads);
    MatchResult vs_p = play_match(agent, AgentHandle::perfect(table), games_per_opponent, 100,
                                  trainer::mix_seed(seed, 2), threads);
    ValidationRates v;
    v.win_vs_random = double(vs_r.wins_first) / double(vs_r.games);
    v.draw_vs_random = double(vs_r.draws) / double(vs_r.games);
    v.loss_vs_random = double(vs_r.wins_second) / double(vs_r.games);
    v.win_vs_perfect = double(vs_p.wins_first) / double(vs_p.games);
    v.draw_vs_perfect = double(vs_p.draws) / double(vs_p.games);
    v.loss_vs_perfect = double(vs_p.wins_second) / double(vs_p.games);
    return v;
}

FinalReport final_evaluation(const nn::Network& net, const solver::SolveTable& table, uint64_t seed,
                             float epsilon, long games_vs_random, long games_vs_perfect,
                             int threads) {
    AgentHandle agent = AgentHandle::dqn(net, epsilon);
    FinalReport rep;
    rep.vs_random = play_match(agent, AgentHandle::random(), games_vs_random, 100,
                               trainer::mix_seed(seed, 11), threads);
    rep.vs_perfect = play_match(agent, AgentHandle::perfect(table), games_vs_perfect, 100,
                                trainer::mix_seed(seed, 12), threads);

    auto rate = [](long n, long d) { return d ? double(n) / double(d) : 0.0; };
    rep.rates.win_vs_random = rate(rep.vs_random.wins_first, rep.vs_random.games);
    rep.rates.draw_vs_random = rate(rep.vs_random.draws, rep.vs_random.games);
    rep.rates.loss_vs_random = rate(rep.vs_random.wins_second, rep.vs_random.games);
    rep.rates.win_vs_perfect = rate(rep.vs_perfect.wins_first, rep.vs_perfect.games);
    rep.rates.draw_vs_perfect = rate(rep.vs_perfect.draws, rep.vs_perfect.games);
    rep.rates.loss_vs_perfect = rate(rep.vs_perfect.wins_second, rep.vs_perfect.games);

    std::ostringstream os;
    os << "=== Final evaluation (epsilon = " << epsilon << ") ===\n";
    os << "vs Random (" << rep.vs_random.games << " games): win " << rep.rates.win_vs_random
       << ", draw " << rep.rates.draw_vs_random << ", loss " << rep.rates.loss_vs_random << "\n";
    os << "  as Player 1: " << rep.vs_random.wins_first_as_p1 << "/" << rep.vs_random.games_first_as_p1
       << " wins (" << rate(rep.vs_random.wins_first_as_p1, rep.vs_random.games_first_as_p1) << ")\n";
    os << "  as Player 2: " << rep.vs_random.wins_first_as_p2 << "/" << rep.vs_random.games_first_as_p2
       << " wins (" << rate(rep.vs_random.wins_first_as_p2, rep.vs_random.games_first_as_p2) << ")\n";
    os << "  mean game length: " << rep.vs_random.mean_length << " turns\n";
    os << "vs Perfect (" << rep.vs_perfect.games << " games): win " << rep.rates.win_vs_perfect
       << ", draw " << rep.rates.draw_vs_perfect << ", loss " << rep.rates.loss_vs_perfect << "\n";
    os << "  mean game length: " << rep.vs_perfect.mean_length << " turns\n";
    rep.text = os.str();

    trainer::CurveRecord cr;
    cr.win_vs_random = rep.rates.win_vs_random;
    cr.draw_vs_random = rep.rates.draw_vs_random;
    cr.loss_vs_random = rep.rates.loss_vs_random;
    cr.win_vs_perfect = rep.rates.win_vs_perfect;
    cr.draw_vs_perfect = rep.rates.draw_vs_perfect;
    cr.loss_vs_perfect = rep.rates.loss_vs_perfect;
    rep.machine = trainer::curve_csv_header() + "\n" + trainer::curve_csv_row(cr) + "\n";
    return rep;
}

}  // namespace lgame::arena
