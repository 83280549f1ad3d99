#include "lgame/game.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <unordered_set>

namespace lgame {

namespace {

struct Offset {
    int r, c;
};

// Base L shape: three cells in a column plus one perpendicular at the bottom end.
constexpr Offset kBaseShape[4] = {{0, 0}, {1, 0}, {2, 0}, {2, 1}};

struct ShapeTables {
    // Normalized offsets per orientation (mirror*4 + quarter_turns).
    Offset shapes[8][4];
    // Per code: occupancy mask (0 = off-board) and sorted cell list.
    uint16_t mask[kNumActionCodes];
    CellSet cells[kNumActionCodes];
    bool valid[kNumActionCodes];

    ShapeTables() {
        for (int o = 0; o < 8; ++o) {
            Offset pts[4];
            for (int i = 0; i < 4; ++i) pts[i] = kBaseShape[i];
            if (o >= 4)
                for (auto& p : pts) p.c = -p.c;
            for (int t = 0; t < o % 4; ++t)
                for (auto& p : pts) p = {p.c, -p.r};
            int mr = pts[0].r, mc = pts[0].c;
            for (auto& p : pts) {
                mr = std::min(mr, p.r);
                mc = std::min(mc, p.c);
            }
            for (int i = 0; i < 4; ++i) shapes[o][i] = {pts[i].r - mr, pts[i].c - mc};
        }
        for (int code = 0; code < kNumActionCodes; ++code) {
            int o = code / 16, a = code % 16;
            int ar = a / 4, ac = a % 4;
            uint16_t m = 0;
            CellSet cs{};
            bool ok = true;
            for (int i = 0; i < 4; ++i) {
                int r = shapes[o][i].r + ar, c = shapes[o][i].c + ac;
                if (r > 3 || c > 3) {
                    ok = false;
                    break;
                }
                int idx = r * 4 + c;
                m |= uint16_t(1) << idx;
                cs[i] = idx;
            }
            valid[code] = ok;
            mask[code] = ok ? m : 0;
            if (ok)
                std::sort(cs.begin(), cs.end());
            else
                cs = {-1, -1, -1, -1};
            cells[code] = cs;
        }
    }
};

const ShapeTables& tables() {
    static const ShapeTables t;
    return t;
}

// Cell-index maps for the 8 board symmetries, same mirror*4 + quarter_turns order
// as placement orientations.
struct SymTables {
    int map[8][16];
    SymTables() {
        for (int sym = 0; sym < 8; ++sym) {
            for (int i = 0; i < 16; ++i) {
                int r = i / 4, c = i % 4;
                if (sym >= 4) c = 3 - c;
                for (int t = 0; t < sym % 4; ++t) {
                    int nr = c, nc = 3 - r;
                    r = nr;
                    c = nc;
                }
                map[sym][i] = r * 4 + c;
            }
        }
    }
};

const SymTables& syms() {
    static const SymTables t;
    return t;
}

uint32_t encode32(const std::array<Cell, 16>& cells) {
    uint32_t v = 0;
    for (int i = 0; i < 16; ++i) v |= uint32_t(cells[i]) << (2 * i);
    return v;
}

// Legality of a placement given the mover's own L mask and everything else on the board.
inline bool placement_legal(uint16_t code_mask, uint16_t own_mask, uint16_t others_mask) {
    return code_mask != 0 && (code_mask & others_mask) == 0 && code_mask != own_mask;
}

}  // namespace

std::optional<CellSet> decode_action(int code) {
    if (code < 0 || code >= kNumActionCodes) throw std::invalid_argument("action code out of range");
    if (!tables().valid[code]) return std::nullopt;
    return tables().cells[code];
}

uint16_t action_cell_mask(int code) {
    if (code < 0 || code >= kNumActionCodes) throw std::invalid_argument("action code out of range");
    return tables().mask[code];
}

int encode_placement(int orientation, uint16_t cell_mask) {
    for (int a = 0; a < 16; ++a) {
        int code = orientation * 16 + a;
        if (tables().mask[code] == cell_mask && cell_mask != 0) return code;
    }
    return -1;
}

std::vector<int> legal_l_placements(const GameState& s) {
    uint16_t own = s.mask_of(l_cell_of(s.to_move));
    uint16_t others = s.occupied_mask() & ~own;
    std::vector<int> out;
    out.reserve(kOnBoardCodes);
    for (int code = 0; code < kNumActionCodes; ++code)
        if (placement_legal(tables().mask[code], own, others)) out.push_back(code);
    return out;
}

std::vector<NeutralAction> legal_neutral_actions(const GameState& intermediate) {
    std::vector<NeutralAction> out;
    out.push_back(NeutralAction::none());
    int piece = 0;
    for (int i = 0; i < 16 && piece < 2; ++i) {
        if (intermediate.cells[i] != Cell::Neutral) continue;
        for (int d = 0; d < 16; ++d)
            if (intermediate.cells[d] == Cell::Empty) out.push_back(NeutralAction::move(piece, d));
        ++piece;
    }
    return out;
}

GameState apply_placement(const GameState& s, int code) {
    GameState out = s;
    Cell own = l_cell_of(s.to_move);
    for (auto& c : out.cells)
        if (c == own) c = Cell::Empty;
    const CellSet placed = *decode_action(code);
    for (int idx : placed) out.cells[idx] = own;
    return out;
}

GameState complete_turn(const GameState& intermediate, NeutralAction n) {
    GameState out = intermediate;
    if (n.is_move()) {
        int piece = 0, src = -1;
        for (int i = 0; i < 16; ++i) {
            if (out.cells[i] == Cell::Neutral) {
                if (piece == n.piece()) {
                    src = i;
                    break;
                }
                ++piece;
            }
        }
        out.cells[src] = Cell::Empty;
        out.cells[n.dest()] = Cell::Neutral;
    }
    out.to_move = opponent(out.to_move);
    return out;
}

GameState apply_turn(const GameState& s, const Turn& t) {
    uint16_t own = s.mask_of(l_cell_of(s.to_move));
    uint16_t others = s.occupied_mask() & ~own;
    if (t.placement < 0 || t.placement >= kNumActionCodes ||
        !placement_legal(tables().mask[t.placement], own, others))
        throw std::invalid_argument("illegal L placement");
    GameState mid = apply_placement(s, t.placement);
    if (t.neutral.is_move()) {
        int piece = t.neutral.piece(), dest = t.neutral.dest();
        if (piece < 0 || piece > 1 || dest < 0 || dest > 15 || mid.cells[dest] != Cell::Empty)
            throw std::invalid_argument("illegal neutral move");
    }
    return complete_turn(mid, t.neutral);
}

std::vector<Turn> legal_turns(const GameState& s) {
    std::vector<Turn> out;
    for (int code : legal_l_placements(s)) {
        GameState mid = apply_placement(s, code);
        for (NeutralAction n : legal_neutral_actions(mid)) out.push_back({code, n});
    }
    return out;
}

bool is_loss(const GameState& s) {
    uint16_t own = s.mask_of(l_cell_of(s.to_move));
    uint16_t others = s.occupied_mask() & ~own;
    for (int code = 0; code < kNumActionCodes; ++code)
        if (placement_legal(tables().mask[code], own, others)) return false;
    return true;
}

GameState transform_state(const GameState& s, int sym) {
    GameState out;
    out.to_move = s.to_move;
    for (int i = 0; i < 16; ++i) out.cells[syms().map[sym][i]] = s.cells[i];
    return out;
}

CanonicalKey canonicalize(const GameState& s) {
    uint32_t best = 0xffffffffu;
    for (int sym = 0; sym < 8; ++sym) {
        std::array<Cell, 16> img{};
        for (int i = 0; i < 16; ++i) img[syms().map[sym][i]] = s.cells[i];
        best = std::min(best, encode32(img));
    }
    return {best};
}

GameState state_from_key(CanonicalKey k, Player to_move) {
    GameState s;
    s.to_move = to_move;
    for (int i = 0; i < 16; ++i) s.cells[i] = Cell((k.key >> (2 * i)) & 3);
    return s;
}

void for_each_canonical_arrangement(const std::function<void(const GameState&, CanonicalKey)>& fn) {
    std::unordered_set<uint32_t> seen;
    for (int ca = 0; ca < kNumActionCodes; ++ca) {
        uint16_t ma = tables().mask[ca];
        if (!ma) continue;
        for (int cb = 0; cb < kNumActionCodes; ++cb) {
            uint16_t mb = tables().mask[cb];
            if (!mb || (ma & mb)) continue;
            uint16_t used = ma | mb;
            for (int n1 = 0; n1 < 16; ++n1) {
                if (used & (uint16_t(1) << n1)) continue;
                for (int n2 = n1 + 1; n2 < 16; ++n2) {
                    if (used & (uint16_t(1) << n2)) continue;
                    GameState s;
                    for (int i = 0; i < 16; ++i) {
                        uint16_t bit = uint16_t(1) << i;
                        s.cells[i] = (ma & bit)    ? Cell::LA
                                     : (mb & bit)  ? Cell::LB
                                     : (i == n1 || i == n2) ? Cell::Neutral
                                                            : Cell::Empty;
                    }
                    CanonicalKey k = canonicalize(s);
                    if (seen.insert(k.key).second) fn(state_from_key(k, Player::A), k);
                }
            }
        }
    }
}

ArrangementCounts enumerate_arrangements() {
    ArrangementCounts counts;
    std::unordered_set<uint32_t> seen;
    for (int ca = 0; ca < kNumActionCodes; ++ca) {
        uint16_t ma = tables().mask[ca];
        if (!ma) continue;
        for (int cb = 0; cb < kNumActionCodes; ++cb) {
            uint16_t mb = tables().mask[cb];
            if (!mb || (ma & mb)) continue;
            uint16_t used = ma | mb;
            for (int n1 = 0; n1 < 16; ++n1) {
                if (used & (uint16_t(1) << n1)) continue;
                for (int n2 = n1 + 1; n2 < 16; ++n2) {
                    if (used & (uint16_t(1) << n2)) continue;
                    ++counts.raw;
                    GameState s;
                    for (int i = 0; i < 16; ++i) {
                        uint16_t bit = uint16_t(1) << i;
                        s.cells[i] = (ma & bit)    ? Cell::LA
                                     : (mb & bit)  ? Cell::LB
                                     : (i == n1 || i == n2) ? Cell::Neutral
                                                            : Cell::Empty;
                    }
                    seen.insert(canonicalize(s).key);
                }
            }
        }
    }
    counts.canonical = long(seen.size());
    return counts;
}

std::array<float, 16> encode_for_network(const GameState& s) {
    Cell own = l_cell_of(s.to_move);
    Cell opp = l_cell_of(opponent(s.to_move));
    std::array<float, 16> v{};
    for (int i = 0; i < 16; ++i) {
        Cell c = s.cells[i];
        v[i] = c == own ? 1.0f : c == opp ? -1.0f : c == Cell::Neutral ? 0.5f : 0.0f;
    }
    return v;
}

std::array<bool, kNumActionCodes> legal_action_mask(const GameState& s) {
    uint16_t own = s.mask_of(l_cell_of(s.to_move));
    uint16_t others = s.occupied_mask() & ~own;
    std::array<bool, kNumActionCodes> m{};
    for (int code = 0; code < kNumActionCodes; ++code)
        m[code] = placement_legal(tables().mask[code], own, others);
    return m;
}

uint64_t legal_action_mask_bits(const GameState& s, uint64_t& hi) {
    uint16_t own = s.mask_of(l_cell_of(s.to_move));
    uint16_t others = s.occupied_mask() & ~own;
    uint64_t lo = 0;
    hi = 0;
    for (int code = 0; code < kNumActionCodes; ++code)
        if (placement_legal(tables().mask[code], own, others)) {
            if (code < 64)
                lo |= uint64_t(1) << code;
            else
                hi |= uint64_t(1) << (code - 64);
        }
    return lo;
}

GameState start_position() {
    // Transcription of the standard opening layout: neutral pieces on the (0,0)/(3,3)
    // diagonal, the two L pieces interlocked around the central columns. The other
    // diagonal is the same arrangement up to symmetry.
    return parse_board(
        "oBB.\n"
        ".AB.\n"
        ".AB.\n"
        ".AAo\n",
        Player::A);
}

std::string render(const GameState& s) {
    std::string out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            Cell cell = s.cells[r * 4 + c];
            out += cell == Cell::LA ? 'A' : cell == Cell::LB ? 'B' : cell == Cell::Neutral ? 'o' : '.';
        }
        out += '\n';
    }
    return out;
}

GameState parse_board(const std::string& text, Player to_move) {
    GameState s;
    s.to_move = to_move;
    int i = 0;
    for (char ch : text) {
        if (ch == '.' || ch == 'A' || ch == 'B' || ch == 'o') {
            if (i >= 16) throw std::invalid_argument("board text has more than 16 cells");
            s.cells[i++] = ch == 'A' ? Cell::LA : ch == 'B' ? Cell::LB : ch == 'o' ? Cell::Neutral : Cell::Empty;
        } else if (!isspace(static_cast<unsigned char>(ch))) {
            throw std::invalid_argument("unexpected character in board text");
        }
    }
    if (i != 16) throw std::invalid_argument("board text has fewer than 16 cells");
    return s;
}

}  // namespace lgame
