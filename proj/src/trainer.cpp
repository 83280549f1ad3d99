#include "lgame/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "lgame/arena.hpp"

namespace lgame::trainer {

namespace fs = std::filesystem;

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
    auto splitmix = [](uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    };
    return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

void ReplayMemory::push_game(GameRecord record) {
    if (record.transitions.empty()) throw std::invalid_argument("refusing to store an empty game");
    total_transitions_ += record.transitions.size();
    games_.push_back(std::move(record));
    if (games_.size() > capacity_) {
        total_transitions_ -= games_.front().transitions.size();
        games_.pop_front();
        ++evicted_;
    }
}

const GameRecord& ReplayMemory::sample_game(std::mt19937_64& rng) const {
    if (games_.empty()) throw std::logic_error("sampling from empty replay memory");
    std::uniform_int_distribution<size_t> pick(0, games_.size() - 1);
    return games_[pick(rng)];
}

const Transition& ReplayMemory::sample_transition(std::mt19937_64& rng) const {
    if (total_transitions_ == 0) throw std::logic_error("sampling from empty replay memory");
    std::uniform_int_distribution<size_t> pick(0, total_transitions_ - 1);
    size_t r = pick(rng);
    for (const auto& g : games_) {
        if (r < g.transitions.size()) return g.transitions[r];
        r -= g.transitions.size();
    }
    throw std::logic_error("transition index out of range");
}

namespace {

using Mat = nn::Network::Mat;
using Vec = nn::Network::Vec;

float masked_max(const Eigen::Ref<const Eigen::RowVectorXf>& q,
                 const std::array<bool, kNumActionCodes>& mask) {
    float best = -1.0f;  // convention: max over an empty legal set is -1
    bool any = false;
    for (int c = 0; c < kNumActionCodes; ++c)
        if (mask[c] && (!any || q(c) > best)) {
            best = q(c);
            any = true;
        }
    return best;
}

}  // namespace

Turn select_turn(const nn::Network& net, const GameState& s, float epsilon, std::mt19937_64& rng) {
    auto placements = legal_l_placements(s);
    if (placements.empty()) throw std::logic_error("select_turn called on a blocked position");

    if (epsilon > 0 && std::uniform_real_distribution<float>(0.0f, 1.0f)(rng) < epsilon) {
        std::uniform_int_distribution<size_t> pp(0, placements.size() - 1);
        int code = placements[pp(rng)];
        GameState mid = apply_placement(s, code);
        auto neutrals = legal_neutral_actions(mid);
        std::uniform_int_distribution<size_t> pn(0, neutrals.size() - 1);
        return {code, neutrals[pn(rng)]};
    }

    // Greedy placement: masked argmax, ties to the lowest code.
    Vec in(16);
    auto enc = encode_for_network(s);
    for (int i = 0; i < 16; ++i) in(i) = enc[i];
    Vec q = forward1(net, in);
    int best_code = placements[0];
    for (int code : placements)
        if (q(code) > q(best_code)) best_code = code;

    // Greedy neutral: minimize the opponent's best masked Q over the 13 resulting states.
    GameState mid = apply_placement(s, best_code);
    auto neutrals = legal_neutral_actions(mid);
    Mat batch(Eigen::Index(neutrals.size()), 16);
    std::vector<GameState> results(neutrals.size());
    for (size_t i = 0; i < neutrals.size(); ++i) {
        results[i] = complete_turn(mid, neutrals[i]);
        auto e = encode_for_network(results[i]);
        for (int j = 0; j < 16; ++j) batch(Eigen::Index(i), j) = e[j];
    }
    Mat qn = forward(net, batch);
    size_t best_n = 0;
    float best_v = 0;
    for (size_t i = 0; i < neutrals.size(); ++i) {
        float v = masked_max(qn.row(Eigen::Index(i)), legal_action_mask(results[i]));
        if (i == 0 || v < best_v) {
            best_v = v;
            best_n = i;
        }
    }
    return {best_code, neutrals[best_n]};
}

GameRecord play_self_game(const nn::Network& net, float epsilon, std::mt19937_64& rng,
                          int draw_turn_cap) {
    GameRecord rec;
    GameState state = start_position();
    for (int turn_i = 0; turn_i < draw_turn_cap; ++turn_i) {
        Turn t = select_turn(net, state, epsilon, rng);
        GameState next = apply_turn(state, t);
        rec.transitions.push_back({state, next, uint8_t(t.placement), 0, false});
        if (is_loss(next)) {
            // Mover just blocked the opponent: +1 on the winning move, -1 on the
            // loser's preceding move, both terminal so neither bootstraps.
            rec.outcome = state.to_move == Player::A ? GameOutcome::AWins : GameOutcome::BWins;
            auto& last = rec.transitions.back();
            last.reward = 1;
            last.terminal = true;
            if (rec.transitions.size() >= 2) {
                auto& prev = rec.transitions[rec.transitions.size() - 2];
                prev.reward = -1;
                prev.terminal = true;
            }
            return rec;
        }
        state = next;
    }
    rec.outcome = GameOutcome::Draw;
    rec.transitions.back().terminal = true;
    if (rec.transitions.size() >= 2) rec.transitions[rec.transitions.size() - 2].terminal = true;
    return rec;
}

TargetBatch compute_targets(const nn::Network& net, const GameRecord& record, float gamma) {
    const size_t n = record.transitions.size();
    TargetBatch b;
    b.inputs.resize(Eigen::Index(n), 16);
    b.actions.resize(n);
    b.targets.resize(Eigen::Index(n));

    std::vector<size_t> boot;  // rows needing a bootstrap forward pass
    for (size_t i = 0; i < n; ++i) {
        const Transition& t = record.transitions[i];
        auto in = t.input();
        for (int j = 0; j < 16; ++j) b.inputs(Eigen::Index(i), j) = in[j];
        b.actions[i] = t.action;
        if (t.terminal)
            b.targets(Eigen::Index(i)) = float(t.reward);
        else
            boot.push_back(i);
    }
    if (!boot.empty()) {
        Mat nx(Eigen::Index(boot.size()), 16);
        for (size_t k = 0; k < boot.size(); ++k) {
            auto in = record.transitions[boot[k]].next_input();
            for (int j = 0; j < 16; ++j) nx(Eigen::Index(k), j) = in[j];
        }
        Mat qn = forward(net, nx);
        for (size_t k = 0; k < boot.size(); ++k) {
            const Transition& t = record.transitions[boot[k]];
            float m = masked_max(qn.row(Eigen::Index(k)), t.next_mask());
            b.targets(Eigen::Index(boot[k])) = float(t.reward) - gamma * m;
        }
    }
    return b;
}

namespace {

void append_batch(TargetBatch& dst, const TargetBatch& src) {
    if (dst.actions.empty()) {
        dst = src;
        return;
    }
    Eigen::Index r0 = dst.inputs.rows();
    dst.inputs.conservativeResize(r0 + src.inputs.rows(), 16);
    dst.inputs.bottomRows(src.inputs.rows()) = src.inputs;
    dst.targets.conservativeResize(r0 + src.targets.size());
    dst.targets.tail(src.targets.size()) = src.targets;
    dst.actions.insert(dst.actions.end(), src.actions.begin(), src.actions.end());
}

float apply_batch(nn::Network& net, nn::OptimizerState& opt, const TargetBatch& b,
                  const nn::OptimizerConfig& ocfg, float lr_scale) {
    auto res = nn::backward(net, b.inputs, b.actions, b.targets);
    nn::optimizer_step(net, opt, res.grads, ocfg, lr_scale);
    return res.loss;
}

}  // namespace

StepStats train_step_variable(nn::Network& net, nn::OptimizerState& opt, const ReplayMemory& memory,
                              int n_samples, float gamma, const nn::OptimizerConfig& ocfg,
                              float lr_scale, std::mt19937_64& rng, bool merge_samples,
                              const nn::Network* bootstrap) {
    StepStats stats;
    if (memory.size() == 0 || n_samples < 1) return stats;
    TargetBatch merged;
    for (int k = 0; k < n_samples; ++k) {
        const GameRecord& g = memory.sample_game(rng);
        ++stats.memory_samples;
        TargetBatch b = compute_targets(bootstrap ? *bootstrap : net, g, gamma);
        if (merge_samples)
            append_batch(merged, b);
        else
            stats.losses.push_back(apply_batch(net, opt, b, ocfg, lr_scale));
    }
    if (merge_samples) stats.losses.push_back(apply_batch(net, opt, merged, ocfg, lr_scale));
    return stats;
}

StepStats train_step_fixed32(nn::Network& net, nn::OptimizerState& opt, const ReplayMemory& memory,
                             float gamma, const nn::OptimizerConfig& ocfg, float lr_scale,
                             std::mt19937_64& rng, const nn::Network* bootstrap) {
    constexpr int kBatch = 32;
    StepStats stats;
    if (memory.total_transitions() < kBatch) return stats;
    GameRecord batch;
    for (int i = 0; i < kBatch; ++i) batch.transitions.push_back(memory.sample_transition(rng));
    stats.memory_samples = kBatch;
    TargetBatch b = compute_targets(bootstrap ? *bootstrap : net, batch, gamma);
    stats.losses.push_back(apply_batch(net, opt, b, ocfg, lr_scale));
    return stats;
}

Schedule schedules(long episode_index, const TrainerConfig& cfg) {
    double frac = cfg.total_games > 0
                      ? std::min(1.0, double(episode_index) / double(cfg.total_games))
                      : 1.0;
    float eps = cfg.epsilon_start + float(frac) * (cfg.epsilon_end - cfg.epsilon_start);
    float lr_scale = frac >= 0.8 ? 0.01f : frac >= 0.5 ? 0.1f : 1.0f;
    return {eps, lr_scale};
}

std::string curve_csv_header() {
    return "episode,epsilon,learning_rate,mean_loss,win_vs_random,draw_vs_random,loss_vs_random,"
           "win_vs_perfect,draw_vs_perfect,loss_vs_perfect";
}

std::string curve_csv_row(const CurveRecord& r) {
    char buf[256];
    snprintf(buf, sizeof buf, "%ld,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f", r.episode,
             double(r.epsilon), double(r.learning_rate), r.mean_loss, r.win_vs_random,
             r.draw_vs_random, r.loss_vs_random, r.win_vs_perfect, r.draw_vs_perfect,
             r.loss_vs_perfect);
    return buf;
}

TrainingResult run_training(const TrainerConfig& cfg, const solver::SolveTable& table,
                            const std::string& out_dir, const std::string& progress_prefix) {
    if (cfg.gamma <= 0 || cfg.gamma > 1) throw std::invalid_argument("gamma must be in (0, 1]");
    if (cfg.epsilon_start < cfg.epsilon_end || cfg.epsilon_end < 0)
        throw std::invalid_argument("epsilon schedule must satisfy start >= end >= 0");
    if (cfg.replay_sample_n < 0) throw std::invalid_argument("replay_sample_n must be >= 0");

    nn::Network net = nn::init_network<float>({16, 512, 512, 128}, mix_seed(cfg.seed, 0));
    nn::OptimizerState opt = nn::OptimizerState::make(net, cfg.optimizer.algo);
    nn::Network target_net = net;
    ReplayMemory memory(cfg.memory_capacity);

    std::mt19937_64 selfplay_rng(mix_seed(cfg.seed, 1));
    std::mt19937_64 replay_rng(mix_seed(cfg.seed, 2));

    std::ofstream curve_file;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        curve_file.open(fs::path(out_dir) / "curve.csv", std::ios::trunc);
        if (!curve_file) throw std::runtime_error("cannot write curve file in " + out_dir);
        curve_file << curve_csv_header() << "\n";
    }

    TrainingResult result;
    double loss_sum = 0;
    long loss_count = 0;
    std::vector<std::pair<long, fs::path>> checkpoints;
    fs::path best_path;
    double best_win = -1;

    for (long ep = 0; ep < cfg.total_games; ++ep) {
        Schedule sched = schedules(ep, cfg);
        GameRecord rec = play_self_game(net, sched.epsilon, selfplay_rng, cfg.draw_turn_cap);
        memory.push_game(rec);

        const nn::Network* bootstrap = cfg.use_target_network ? &target_net : nullptr;
        StepStats stats;
        if (cfg.batch_mode == BatchMode::Fixed32) {
            stats = train_step_fixed32(net, opt, memory, cfg.gamma, cfg.optimizer, sched.lr_scale,
                                       replay_rng, bootstrap);
        } else if (cfg.replay_sample_n == 0) {
            TargetBatch b = compute_targets(bootstrap ? *bootstrap : net, rec, cfg.gamma);
            stats.losses.push_back(apply_batch(net, opt, b, cfg.optimizer, sched.lr_scale));
        } else {
            stats = train_step_variable(net, opt, memory, cfg.replay_sample_n, cfg.gamma,
                                        cfg.optimizer, sched.lr_scale, replay_rng,
                                        cfg.merge_samples, bootstrap);
        }
        for (float l : stats.losses) {
            loss_sum += l;
            ++loss_count;
        }

        if (cfg.use_target_network && (ep + 1) % cfg.target_sync_every == 0) target_net = net;

        if (cfg.validate_every > 0 && (ep + 1) % cfg.validate_every == 0) {
            arena::ValidationRates rates =
                arena::validate(net, table, cfg.validate_games, 0.01f, mix_seed(cfg.seed, 3, ep));
            CurveRecord cr;
            cr.episode = ep + 1;
            cr.epsilon = sched.epsilon;
            cr.learning_rate = cfg.optimizer.algo == nn::Algo::RmsProp
                                   ? cfg.optimizer.rmsprop_lr * sched.lr_scale
                                   : cfg.optimizer.lr * sched.lr_scale;
            cr.mean_loss = loss_count ? loss_sum / loss_count : 0.0;
            cr.win_vs_random = rates.win_vs_random;
            cr.draw_vs_random = rates.draw_vs_random;
            cr.loss_vs_random = rates.loss_vs_random;
            cr.win_vs_perfect = rates.win_vs_perfect;
            cr.draw_vs_perfect = rates.draw_vs_perfect;
            cr.loss_vs_perfect = rates.loss_vs_perfect;
            result.curve.push_back(cr);
            loss_sum = 0;
            loss_count = 0;

            if (curve_file) {
                curve_file << curve_csv_row(cr) << "\n";
                curve_file.flush();
            }
            if (!out_dir.empty()) {
                char name[64];
                snprintf(name, sizeof name, "ckpt_%08ld.bin", ep + 1);
                fs::path p = fs::path(out_dir) / name;
                nn::save_model(net, opt, cfg.optimizer.algo, p.string());
                checkpoints.emplace_back(ep + 1, p);
                if (cr.win_vs_random > best_win) {
                    best_win = cr.win_vs_random;
                    best_path = p;
                }
                // Keep the last 5 checkpoints plus the best one by win rate.
                while (checkpoints.size() > 5) {
                    auto [e, path] = checkpoints.front();
                    checkpoints.erase(checkpoints.begin());
                    if (path != best_path) fs::remove(path);
                }
            }
            if (!progress_prefix.empty())
                fprintf(stderr, "[%s] episode %ld win_vs_random=%.3f draw_vs_perfect=%.3f loss=%.4f\n",
                        progress_prefix.c_str(), ep + 1, cr.win_vs_random, cr.draw_vs_perfect,
                        cr.mean_loss);
        }
    }
    result.net = std::move(net);
    return result;
}

}  // namespace lgame::trainer
