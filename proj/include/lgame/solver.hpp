#pragma once

#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "lgame/game.hpp"

namespace lgame::solver {

enum class Outcome : uint8_t { Win, Loss, Draw };

// Game-theoretic value from the side-to-move's perspective. Distance is in plies;
// 0 for a blocked position, -1 for draws.
struct SolvedValue {
    Outcome outcome = Outcome::Draw;
    int distance = -1;
    bool operator==(const SolvedValue&) const = default;
};

struct SolveReport {
    long raw_arrangements = 0;
    long canonical_arrangements = 0;
    int blocked_a = 0;           // arrangements where player A has no placement
    int blocked_b = 0;
    int blocked_either = 0;      // arrangements with at least one blocked side
    int blocked_both = 0;
    int blocked_positions = 0;   // (arrangement, side) pairs
    int max_legal_placements = 0;  // over all (arrangement, side) positions
    int max_legal_turns = 0;       // placements x neutral options
    // Win-distance histogram over positions, keyed by ply distance.
    std::map<int, int> win_ply_histogram;
    // "Win within 5 moves" candidate counts under the enumerated interpretations,
    // each excluding arrangements already counted as blocked.
    std::map<std::string, int> win_within_interpretations;

    std::string to_text() const;
};

class SolveTable {
  public:
    // Full retrograde solution of the game graph: seed losses at blocked positions,
    // propagate backwards to a fixpoint, label the remainder DRAW.
    static SolveTable solve_all();

    const SolvedValue& query(const GameState& s) const;

    // Optimal turn with seeded uniform tie-breaking among equally good moves:
    // WIN -> fastest win, DRAW -> any drawing move, LOSS -> maximal resistance.
    Turn perfect_move(const GameState& s, std::mt19937_64& rng) const;

    const SolveReport& report() const { return report_; }
    size_t position_count() const { return values_.size(); }
    size_t arrangement_count() const { return reps_.size(); }

    // Representative state (canonical image) for arrangement index i with the given side.
    GameState position(size_t i, Player side) const;
    const SolvedValue& value_at(size_t i, Player side) const { return values_[i * 2 + size_t(side)]; }

    // One sorted line per position: "<key hex> <A|B> <W|L|D> <distance>".
    std::string dump() const;

  private:
    std::vector<CanonicalKey> reps_;
    std::vector<SolvedValue> values_;  // 2 entries per arrangement, side A then B
    std::unordered_map<uint32_t, int32_t> index_;
    SolveReport report_;

    int position_index(const GameState& s) const;
};

}  // namespace lgame::solver
