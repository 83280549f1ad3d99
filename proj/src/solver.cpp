#include "lgame/solver.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lgame::solver {

namespace {

constexpr int kUnlabeled = -1;

}  // namespace

SolveTable SolveTable::solve_all() {
    SolveTable t;
    for_each_canonical_arrangement([&](const GameState&, CanonicalKey k) {
        t.index_.emplace(k.key, int32_t(t.reps_.size()));
        t.reps_.push_back(k);
    });
    const size_t n_arr = t.reps_.size();
    const size_t n_pos = n_arr * 2;

    // Successor lists over position ids (arrangement*2 + side).
    std::vector<std::vector<int32_t>> succs(n_pos);
    std::vector<bool> blocked(n_pos, false);
    for (size_t i = 0; i < n_arr; ++i) {
        for (int side = 0; side < 2; ++side) {
            GameState s = state_from_key(t.reps_[i], Player(side));
            size_t pos = i * 2 + side;
            auto placements = legal_l_placements(s);
            if (placements.empty()) {
                blocked[pos] = true;
                continue;
            }
            auto& out = succs[pos];
            for (int code : placements) {
                GameState mid = apply_placement(s, code);
                for (NeutralAction n : legal_neutral_actions(mid)) {
                    GameState nxt = complete_turn(mid, n);
                    int32_t idx = t.index_.at(canonicalize(nxt).key);
                    out.push_back(idx * 2 + int32_t(nxt.to_move));
                }
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
        }
    }

    std::vector<std::vector<int32_t>> preds(n_pos);
    for (size_t p = 0; p < n_pos; ++p)
        for (int32_t q : succs[p]) preds[q].push_back(int32_t(p));

    // Retrograde BFS: queue holds labeled positions in nondecreasing distance order.
    std::vector<int8_t> label(n_pos, kUnlabeled);  // 0 win, 1 loss
    std::vector<int> dist(n_pos, -1);
    std::vector<int> remaining(n_pos);
    for (size_t p = 0; p < n_pos; ++p) remaining[p] = int(succs[p].size());

    std::deque<int32_t> queue;
    for (size_t p = 0; p < n_pos; ++p)
        if (blocked[p]) {
            label[p] = 1;
            dist[p] = 0;
            queue.push_back(int32_t(p));
        }
    while (!queue.empty()) {
        int32_t q = queue.front();
        queue.pop_front();
        for (int32_t p : preds[q]) {
            if (label[p] != kUnlabeled) continue;
            if (label[q] == 1) {  // predecessor can move into a lost-for-opponent position
                label[p] = 0;
                dist[p] = dist[q] + 1;
                queue.push_back(p);
            } else if (--remaining[p] == 0) {  // every move reaches a winning opponent
                label[p] = 1;
                dist[p] = dist[q] + 1;
                queue.push_back(p);
            }
        }
    }

    t.values_.resize(n_pos);
    for (size_t p = 0; p < n_pos; ++p) {
        if (label[p] == 0)
            t.values_[p] = {Outcome::Win, dist[p]};
        else if (label[p] == 1)
            t.values_[p] = {Outcome::Loss, dist[p]};
        else
            t.values_[p] = {Outcome::Draw, -1};
    }

    // Report.
    SolveReport& r = t.report_;
    auto counts = enumerate_arrangements();
    r.raw_arrangements = counts.raw;
    r.canonical_arrangements = counts.canonical;
    std::vector<bool> arr_blocked(n_arr, false);
    for (size_t i = 0; i < n_arr; ++i) {
        bool ba = blocked[i * 2 + 0], bb = blocked[i * 2 + 1];
        r.blocked_a += ba;
        r.blocked_b += bb;
        r.blocked_either += (ba || bb);
        r.blocked_both += (ba && bb);
        r.blocked_positions += int(ba) + int(bb);
        arr_blocked[i] = ba || bb;
        for (int side = 0; side < 2; ++side) {
            size_t pos = i * 2 + side;
            GameState s = state_from_key(t.reps_[i], Player(side));
            int placements = int(legal_l_placements(s).size());
            r.max_legal_placements = std::max(r.max_legal_placements, placements);
            r.max_legal_turns = std::max(r.max_legal_turns, int(legal_turns(s).size()));
            if (t.values_[pos].outcome == Outcome::Win) ++r.win_ply_histogram[t.values_[pos].distance];
        }
    }

    // "Win within a maximum of 5 moves" under several distance interpretations,
    // always excluding arrangements that already have a blocked side.
    auto count_within = [&](auto unit_of, int limit) {
        int positions = 0, arrangements = 0, side_a = 0;
        for (size_t i = 0; i < n_arr; ++i) {
            if (arr_blocked[i]) continue;
            bool any = false;
            for (int side = 0; side < 2; ++side) {
                const SolvedValue& v = t.values_[i * 2 + side];
                if (v.outcome == Outcome::Win && unit_of(v.distance) <= limit) {
                    ++positions;
                    any = true;
                    if (side == 0) ++side_a;
                }
            }
            arrangements += any;
        }
        return std::array<int, 3>{positions, arrangements, side_a};
    };
    auto plies = [](int d) { return d; };
    auto winner_moves = [](int d) { return (d + 1) / 2; };
    for (auto [name, unit] : std::vector<std::pair<std::string, int (*)(int)>>{
             {"plies", plies}, {"winner_moves", winner_moves}}) {
        auto c = count_within(unit, 5);
        r.win_within_interpretations["win_positions_" + name + "_le5"] = c[0];
        r.win_within_interpretations["win_arrangements_any_side_" + name + "_le5"] = c[1];
        r.win_within_interpretations["win_arrangements_side_a_" + name + "_le5"] = c[2];
    }
    // Reading "lead to a win after a maximum of 5 moves" from the winner's seat:
    // arrangements where the side to move is in a forced loss that has not happened
    // yet (distance > 0), so the opponent converts within at most 5 of his own moves.
    {
        int side_a = 0, side_b = 0, any = 0;
        for (size_t i = 0; i < n_arr; ++i) {
            bool a = false, b = false;
            for (int side = 0; side < 2; ++side) {
                const SolvedValue& v = t.values_[i * 2 + side];
                if (v.outcome == Outcome::Loss && v.distance > 0 && v.distance / 2 <= 5)
                    (side == 0 ? a : b) = true;
            }
            side_a += a;
            side_b += b;
            any += (a || b);
        }
        r.win_within_interpretations["forced_loss_arrangements_side_a"] = side_a;
        r.win_within_interpretations["forced_loss_arrangements_side_b"] = side_b;
        r.win_within_interpretations["forced_loss_arrangements_any_side"] = any;
    }

    return t;
}

int SolveTable::position_index(const GameState& s) const {
    auto it = index_.find(canonicalize(s).key);
    if (it == index_.end()) throw std::logic_error("position missing from solve table");
    return it->second * 2 + int(s.to_move);
}

const SolvedValue& SolveTable::query(const GameState& s) const { return values_[position_index(s)]; }

GameState SolveTable::position(size_t i, Player side) const { return state_from_key(reps_[i], side); }

Turn SolveTable::perfect_move(const GameState& s, std::mt19937_64& rng) const {
    const SolvedValue v = query(s);
    std::vector<Turn> candidates;
    int best_resist = -1;
    for (int code : legal_l_placements(s)) {
        GameState mid = apply_placement(s, code);
        for (NeutralAction n : legal_neutral_actions(mid)) {
            GameState nxt = complete_turn(mid, n);
            const SolvedValue sv = query(nxt);
            switch (v.outcome) {
                case Outcome::Win:
                    if (sv.outcome == Outcome::Loss && sv.distance == v.distance - 1)
                        candidates.push_back({code, n});
                    break;
                case Outcome::Draw:
                    if (sv.outcome == Outcome::Draw) candidates.push_back({code, n});
                    break;
                case Outcome::Loss:
                    if (sv.outcome == Outcome::Win) {
                        if (sv.distance > best_resist) {
                            best_resist = sv.distance;
                            candidates.clear();
                        }
                        if (sv.distance == best_resist) candidates.push_back({code, n});
                    }
                    break;
            }
        }
    }
    if (candidates.empty()) throw std::logic_error("perfect_move called on a blocked position");
    std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
}

std::string SolveTable::dump() const {
    std::vector<std::string> lines;
    lines.reserve(values_.size());
    char buf[64];
    for (size_t i = 0; i < reps_.size(); ++i) {
        for (int side = 0; side < 2; ++side) {
            const SolvedValue& v = values_[i * 2 + side];
            char o = v.outcome == Outcome::Win ? 'W' : v.outcome == Outcome::Loss ? 'L' : 'D';
            snprintf(buf, sizeof buf, "%08x %c %c %d", reps_[i].key, side == 0 ? 'A' : 'B', o,
                     v.distance);
            lines.emplace_back(buf);
        }
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

std::string SolveReport::to_text() const {
    std::ostringstream os;
    os << "raw arrangements: " << raw_arrangements << "\n";
    os << "canonical arrangements: " << canonical_arrangements << "\n";
    os << "blocked arrangements: " << blocked_a << "\n";
    os << "blocked arrangements (A blocked): " << blocked_a << ", (B blocked): " << blocked_b
       << ", (either): " << blocked_either << ", (both): " << blocked_both << "\n";
    os << "blocked (arrangement, side) positions: " << blocked_positions << "\n";
    os << "max legal placements in a position: " << max_legal_placements << "\n";
    os << "max legal full turns in a position: " << max_legal_turns << "\n";
    os << "win distance histogram (plies: positions):";
    for (auto& [d, c] : win_ply_histogram) os << " " << d << ":" << c;
    os << "\n";
    os << "win-within-5-moves counts (blocked arrangements excluded):\n";
    for (auto& [k, v] : win_within_interpretations) os << "  " << k << " = " << v << "\n";
    return os.str();
}

}  // namespace lgame::solver
