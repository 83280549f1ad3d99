// Command-line driver: enumeration and solve reports, training runs, parameter
// sweeps, checkpoint evaluation, and an interactive play mode.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lgame/arena.hpp"
#include "lgame/solver.hpp"
#include "lgame/trainer.hpp"

namespace fs = std::filesystem;
using namespace lgame;

namespace {

const solver::SolveTable& table() {
    static solver::SolveTable t = solver::SolveTable::solve_all();
    return t;
}

struct RunConfig {
    trainer::TrainerConfig tc;
    std::string out_dir;
    std::string batch_mode = "variable";
    std::string optimizer = "sgd";
    std::string model_path;
    long eval_games_random = 10000;
    long eval_games_perfect = 1000;
    int threads = 1;
    // sweep grids
    std::vector<int> sweep_replay{0, 1, 5, 10, 25, 50};
    std::vector<std::string> sweep_optimizers{"sgd", "rmsprop", "adadelta"};
    std::vector<std::string> sweep_batches{"variable", "fixed32"};
    std::string sweep_axis = "replay";
};

void resolve(RunConfig& rc) {
    if (rc.batch_mode == "variable")
        rc.tc.batch_mode = trainer::BatchMode::VariableGame;
    else if (rc.batch_mode == "fixed32")
        rc.tc.batch_mode = trainer::BatchMode::Fixed32;
    else
        throw CLI::ValidationError("--batch-mode must be variable or fixed32");
    rc.tc.optimizer.algo = nn::algo_from_string(rc.optimizer);
}

// Echo the fully resolved configuration so a run is reproducible via
// `lgame --config config.txt <command>` (plus --out).
void write_effective_config(const RunConfig& rc, const fs::path& dir, const std::string& section) {
    std::ofstream f(dir / "config.txt", std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / "config.txt").string());
    f << "seed = " << rc.tc.seed << "\n"
      << "[" << section << "]\n"
      << "games = " << rc.tc.total_games << "\n"
      << "gamma = " << rc.tc.gamma << "\n"
      << "epsilon-start = " << rc.tc.epsilon_start << "\n"
      << "epsilon-end = " << rc.tc.epsilon_end << "\n"
      << "replay-sample = " << rc.tc.replay_sample_n << "\n"
      << "batch-mode = " << rc.batch_mode << "\n"
      << "optimizer = " << nn::algo_name(rc.tc.optimizer.algo) << "\n"
      << "validate-every = " << rc.tc.validate_every << "\n"
      << "validate-games = " << rc.tc.validate_games << "\n"
      << "draw-turn-cap = " << rc.tc.draw_turn_cap << "\n"
      << "memory = " << rc.tc.memory_capacity << "\n";
    if (rc.tc.use_target_network) f << "target-network = true\n";
    if (rc.tc.merge_samples) f << "merge-samples = true\n";
}

int cmd_enumerate() {
    std::cout << table().report().to_text();
    return 0;
}

int cmd_solve(const std::string& out) {
    std::cout << table().report().to_text();
    if (!out.empty()) {
        fs::create_directories(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path());
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + out);
        f << table().dump();
        std::cout << "table written to " << out << "\n";
    }
    return 0;
}

int cmd_train(RunConfig rc) {
    resolve(rc);
    if (rc.out_dir.empty()) throw CLI::ValidationError("train requires --out");
    fs::create_directories(rc.out_dir);
    write_effective_config(rc, rc.out_dir, "train");
    trainer::TrainingResult res = trainer::run_training(rc.tc, table(), rc.out_dir, "train");
    nn::OptimizerState dummy = nn::OptimizerState::make(res.net, rc.tc.optimizer.algo);
    nn::save_model(res.net, dummy, rc.tc.optimizer.algo, (fs::path(rc.out_dir) / "final.bin").string());
    arena::FinalReport rep = arena::final_evaluation(res.net, table(), trainer::mix_seed(rc.tc.seed, 9),
                                                     0.01f, rc.eval_games_random,
                                                     rc.eval_games_perfect, rc.threads);
    std::cout << rep.text;
    std::ofstream(fs::path(rc.out_dir) / "final_report.txt") << rep.text << "\n" << rep.machine << "\n";
    return 0;
}

int cmd_sweep(RunConfig rc) {
    resolve(rc);
    if (rc.out_dir.empty()) throw CLI::ValidationError("sweep requires --out");
    fs::create_directories(rc.out_dir);
    write_effective_config(rc, rc.out_dir, "sweep");

    struct Cell {
        std::string name;
        trainer::TrainerConfig tc;
    };
    std::vector<Cell> cells;
    if (rc.sweep_axis == "replay") {
        for (int n : rc.sweep_replay) {
            Cell c{"replay_n" + std::to_string(n), rc.tc};
            c.tc.replay_sample_n = n;
            cells.push_back(c);
        }
    } else if (rc.sweep_axis == "optimizer") {
        for (auto& o : rc.sweep_optimizers) {
            Cell c{"optimizer_" + o, rc.tc};
            c.tc.optimizer.algo = nn::algo_from_string(o);
            cells.push_back(c);
        }
    } else if (rc.sweep_axis == "batch") {
        for (auto& b : rc.sweep_batches) {
            Cell c{"batch_" + b, rc.tc};
            c.tc.batch_mode =
                b == "fixed32" ? trainer::BatchMode::Fixed32 : trainer::BatchMode::VariableGame;
            cells.push_back(c);
        }
    } else {
        throw CLI::ValidationError("--axis must be replay, optimizer, or batch");
    }
    if (cells.empty()) throw CLI::ValidationError("sweep grid is empty");

    for (auto& cell : cells) {
        fs::path dir = fs::path(rc.out_dir) / cell.name;
        std::cout << "=== " << cell.name << " ===\n";
        trainer::TrainingResult res = trainer::run_training(cell.tc, table(), dir.string(), cell.name);
        // one curve file per cell, named by its parameters
        fs::copy_file(dir / "curve.csv", fs::path(rc.out_dir) / (cell.name + ".csv"),
                      fs::copy_options::overwrite_existing);
        if (!res.curve.empty())
            std::cout << cell.name << ": final win vs random = " << res.curve.back().win_vs_random
                      << "\n";
    }
    return 0;
}

int cmd_eval(const RunConfig& rc) {
    if (rc.model_path.empty()) throw CLI::ValidationError("eval requires --model");
    nn::LoadedModel m = nn::load_model(rc.model_path);
    arena::FinalReport rep =
        arena::final_evaluation(m.net, table(), rc.tc.seed, 0.01f, rc.eval_games_random,
                                rc.eval_games_perfect, rc.threads);
    std::cout << rep.text;
    if (!rc.out_dir.empty()) {
        fs::create_directories(rc.out_dir);
        std::ofstream(fs::path(rc.out_dir) / "eval_report.txt") << rep.text << "\n" << rep.machine << "\n";
    }
    return 0;
}

// --- interactive play -------------------------------------------------------

void print_legal(const GameState& s) {
    std::cout << "legal placement codes:";
    for (int code : legal_l_placements(s)) std::cout << " " << code;
    std::cout << "\n";
}

bool read_human_turn(GameState& s) {  // returns false on quit
    while (true) {
        std::cout << "your move (placement code [piece dest] | list | quit): " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) return false;
        std::istringstream is(line);
        std::string tok;
        if (!(is >> tok)) continue;
        if (tok == "quit" || tok == "q") return false;
        if (tok == "list") {
            print_legal(s);
            continue;
        }
        Turn t;
        try {
            t.placement = std::stoi(tok);
        } catch (const std::exception&) {
            std::cout << "not a placement code\n";
            continue;
        }
        int piece, dest;
        if (is >> piece >> dest)
            t.neutral = NeutralAction::move(piece, dest);
        else
            t.neutral = NeutralAction::none();
        try {
            s = apply_turn(s, t);
            return true;
        } catch (const std::invalid_argument& e) {
            std::cout << e.what() << "\n";
            print_legal(s);
        }
    }
}

int cmd_play(const RunConfig& rc, const std::string& opponent, int human_side) {
    nn::Network net;
    bool use_perfect = opponent == "perfect";
    if (!use_perfect) net = nn::load_model(opponent).net;
    std::mt19937_64 rng(rc.tc.seed);
    GameState s = start_position();
    Player human = Player(human_side);
    std::cout << "you are " << (human == Player::A ? "A" : "B") << "; cells are numbered 0-15 "
              << "row-major; a turn is an L placement code plus an optional neutral move "
              << "(piece 0|1, destination cell)\n";
    for (int turn_i = 0; turn_i < 100; ++turn_i) {
        std::cout << "\n" << render(s);
        if (is_loss(s)) {
            std::cout << (s.to_move == human ? "you are blocked - you lose\n"
                                             : "opponent is blocked - you win\n");
            return 0;
        }
        if (s.to_move == human) {
            if (!read_human_turn(s)) {
                std::cout << "bye\n";
                return 0;
            }
        } else {
            Turn t = use_perfect ? table().perfect_move(s, rng)
                                 : trainer::select_turn(net, s, 0.0f, rng);
            std::cout << "opponent plays placement " << t.placement;
            if (t.neutral.is_move())
                std::cout << ", neutral " << t.neutral.piece() << " -> " << t.neutral.dest();
            std::cout << "\n";
            s = apply_turn(s, t);
        }
    }
    std::cout << "\n" << render(s) << "draw (turn cap reached)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"L-Game laboratory: exact solver plus a self-play Q-learning agent"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    RunConfig rc;
    app.add_option("--seed", rc.tc.seed, "master RNG seed")->configurable(true);
    app.add_option("--out", rc.out_dir, "output directory")->configurable(true);
    app.add_option("--threads", rc.threads, "arena worker threads")->configurable(true);

    app.add_subcommand("enumerate", "print arrangement and blocked-position counts");

    auto* solve = app.add_subcommand("solve", "solve the game and optionally dump the table");
    std::string solve_out;
    solve->add_option("--table-out", solve_out, "write the full value table to this file");

    auto add_train_flags = [&](CLI::App* c) {
        c->add_option("--games", rc.tc.total_games, "self-play training games");
        c->add_option("--gamma", rc.tc.gamma, "discount factor");
        c->add_option("--epsilon-start", rc.tc.epsilon_start, "exploration at episode 0");
        c->add_option("--epsilon-end", rc.tc.epsilon_end, "exploration at the last episode");
        c->add_option("--replay-sample", rc.tc.replay_sample_n,
                      "games recalled per step (0: just-played game only)");
        c->add_option("--batch-mode", rc.batch_mode, "variable|fixed32");
        c->add_option("--optimizer", rc.optimizer, "sgd|rmsprop|adadelta");
        c->add_option("--validate-every", rc.tc.validate_every, "episodes between validations");
        c->add_option("--validate-games", rc.tc.validate_games, "games per validation opponent");
        c->add_option("--draw-turn-cap", rc.tc.draw_turn_cap, "turns before a game is a draw");
        c->add_option("--memory", rc.tc.memory_capacity, "replay memory capacity in games");
        c->add_flag("--target-network", rc.tc.use_target_network, "bootstrap from a frozen copy");
        c->add_option("--target-sync-every", rc.tc.target_sync_every, "episodes between syncs");
        c->add_flag("--merge-samples", rc.tc.merge_samples, "one merged batch per recall");
        c->add_option("--eval-games-random", rc.eval_games_random, "final evaluation games vs random");
        c->add_option("--eval-games-perfect", rc.eval_games_perfect,
                      "final evaluation games vs perfect");
    };
    auto* train = app.add_subcommand("train", "run a training job and a final evaluation");
    add_train_flags(train);

    auto* sweep = app.add_subcommand("sweep", "train one run per grid cell on a single axis");
    add_train_flags(sweep);
    sweep->add_option("--axis", rc.sweep_axis, "replay|optimizer|batch");
    sweep->add_option("--replay-grid", rc.sweep_replay, "recall counts for --axis replay");
    sweep->add_option("--optimizer-grid", rc.sweep_optimizers, "optimizers for --axis optimizer");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint against random and perfect");
    eval->add_option("--model", rc.model_path, "checkpoint path")->required();
    eval->add_option("--games-random", rc.eval_games_random, "games vs random");
    eval->add_option("--games-perfect", rc.eval_games_perfect, "games vs perfect");

    auto* play = app.add_subcommand("play", "interactive game against a model or the perfect player");
    std::string opponent = "perfect";
    int human_side = 0;
    play->add_option("--opponent", opponent, "checkpoint path or 'perfect'");
    play->add_option("--side", human_side, "0: play as A (moves first), 1: play as B")
        ->check(CLI::Range(0, 1));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 1: usage error
    }

    try {
        if (app.got_subcommand("enumerate")) return cmd_enumerate();
        if (app.got_subcommand("solve")) return cmd_solve(solve_out);
        if (app.got_subcommand("train")) return cmd_train(rc);
        if (app.got_subcommand("sweep")) return cmd_sweep(rc);
        if (app.got_subcommand("eval")) return cmd_eval(rc);
        if (app.got_subcommand("play")) return cmd_play(rc, opponent, human_side);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;  // runtime failure
    }
    return 1;
}
