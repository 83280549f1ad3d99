#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lgame {

enum class Cell : uint8_t { Empty = 0, LA = 1, LB = 2, Neutral = 3 };
enum class Player : uint8_t { A = 0, B = 1 };

inline Player opponent(Player p) { return p == Player::A ? Player::B : Player::A; }
inline Cell l_cell_of(Player p) { return p == Player::A ? Cell::LA : Cell::LB; }

// The MDP state: 4x4 board occupancy plus side to move. Cell index = row*4 + col.
struct GameState {
    std::array<Cell, 16> cells{};
    Player to_move = Player::A;

    uint16_t mask_of(Cell c) const {
        uint16_t m = 0;
        for (int i = 0; i < 16; ++i)
            if (cells[i] == c) m |= uint16_t(1) << i;
        return m;
    }
    uint16_t occupied_mask() const {
        uint16_t m = 0;
        for (int i = 0; i < 16; ++i)
            if (cells[i] != Cell::Empty) m |= uint16_t(1) << i;
        return m;
    }
    bool operator==(const GameState&) const = default;
};

// L placement encoded as orientation*16 + anchor. Orientation = mirror*4 + quarter_turns.
// 48 of the 128 codes decode to fully on-board placements.
constexpr int kNumActionCodes = 128;
constexpr int kOnBoardCodes = 48;

// Neutral phase: code 0 = leave both neutral pieces, 1 + piece*16 + destination otherwise.
// Pieces are indexed 0/1 by ascending cell index in the intermediate state.
struct NeutralAction {
    int code = 0;

    static NeutralAction none() { return {0}; }
    static NeutralAction move(int piece, int dest) { return {1 + piece * 16 + dest}; }
    bool is_move() const { return code != 0; }
    int piece() const { return (code - 1) / 16; }
    int dest() const { return (code - 1) % 16; }
    bool operator==(const NeutralAction&) const = default;
};

struct Turn {
    int placement = 0;
    NeutralAction neutral;
    bool operator==(const Turn&) const = default;
};

// Arrangement identity modulo the 8 symmetries of the square, neutral pair unordered
// (unordered for free: the cell array does not distinguish the two neutral pieces).
// Side to move is NOT part of the key.
struct CanonicalKey {
    uint32_t key = 0;
    auto operator<=>(const CanonicalKey&) const = default;
};

using CellSet = std::array<int, 4>;  // sorted ascending

// Decoded placement cells, or nullopt when any offset falls off the board.
std::optional<CellSet> decode_action(int code);

// 16-bit occupancy mask of a placement; 0 for off-board codes.
uint16_t action_cell_mask(int code);

// Inverse of decode for on-board codes: the code of `cells` under orientation `o`.
int encode_placement(int orientation, uint16_t cell_mask);

std::vector<int> legal_l_placements(const GameState& s);
std::vector<NeutralAction> legal_neutral_actions(const GameState& intermediate);

// Phase helpers. apply_placement keeps to_move unchanged (the "intermediate" state);
// complete_turn relocates the chosen neutral and flips to_move.
GameState apply_placement(const GameState& s, int code);
GameState complete_turn(const GameState& intermediate, NeutralAction n);

// Validating composition of the two phases. Throws std::invalid_argument with a
// phase-specific message on an illegal placement or neutral action.
GameState apply_turn(const GameState& s, const Turn& t);

std::vector<Turn> legal_turns(const GameState& s);

// Side to move has no legal L placement.
bool is_loss(const GameState& s);

GameState transform_state(const GameState& s, int sym);  // sym in 0..7
CanonicalKey canonicalize(const GameState& s);
GameState state_from_key(CanonicalKey k, Player to_move);

struct ArrangementCounts {
    long raw = 0;
    long canonical = 0;
};
ArrangementCounts enumerate_arrangements();

// Visit each distinct canonical arrangement once, with its minimal-image representative.
void for_each_canonical_arrangement(const std::function<void(const GameState&, CanonicalKey)>& fn);

// Mover-perspective board encoding: own L +1, opponent L -1, neutral +0.5, empty 0.
std::array<float, 16> encode_for_network(const GameState& s);

std::array<bool, kNumActionCodes> legal_action_mask(const GameState& s);
uint64_t legal_action_mask_bits(const GameState& s, uint64_t& hi);  // lo returned, hi out

GameState start_position();

// 4 lines of 4 chars from {'.','A','B','o'}, row 0 first, each line newline-terminated.
std::string render(const GameState& s);
// Inverse of render for tests/CLI; ignores whitespace between rows.
GameState parse_board(const std::string& text, Player to_move);

}  // namespace lgame
