#include "influence/env/layout.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace influence {

namespace {

// Reconstructed kitchens. Player 0 (the ego agent) spawns at '1'.
constexpr std::string_view kAsymmetricAdvantages =
    "XXXXXXXXX\n"
    "O XSXOX S\n"
    "X   P   X\n"
    "X1  P  2X\n"
    "XTXDXDXTX";

// Ingredients and plates on the left, pots and delivery on the right; the
// middle column of counters is the only way to pass objects.
constexpr std::string_view kForcedCoordination =
    "XXXPX\n"
    "O X1P\n"
    "T2X X\n"
    "D X X\n"
    "XXXSX";

// Two mirrored half-kitchens joined by a single middle cell. The only onion
// source sits in a nook above that cell, so standing in the junction cuts
// the right-hand player off from onions while tomatoes stay reachable.
constexpr std::string_view kOpenAsymmetricAdvantages =
    "XXPXOXPXX\n"
    "X  X X  X\n"
    "T 1    2T\n"
    "X  XXX  X\n"
    "XDSXXXSDX";

constexpr std::string_view kCounterCircuit =
    "XXXPPXXX\n"
    "X 1    X\n"
    "D XXXX S\n"
    "X    2 X\n"
    "XXXOTXXX";

struct Builtin {
  std::string_view name;
  std::string_view text;
};

constexpr std::array<Builtin, 4> kBuiltins{{
    {"asymmetric_advantages", kAsymmetricAdvantages},
    {"forced_coordination", kForcedCoordination},
    {"open_asymmetric_advantages", kOpenAsymmetricAdvantages},
    {"counter_circuit", kCounterCircuit},
}};

char tile_char(TileKind t) {
  switch (t) {
    case TileKind::floor: return ' ';
    case TileKind::counter: return 'X';
    case TileKind::onion_source: return 'O';
    case TileKind::tomato_source: return 'T';
    case TileKind::plate_dispenser: return 'D';
    case TileKind::pot: return 'P';
    case TileKind::delivery: return 'S';
  }
  return '?';
}

std::vector<std::string> split_rows(std::string_view text) {
  std::vector<std::string> rows;
  std::string cur;
  for (char ch : text) {
    if (ch == '\r') continue;
    if (ch == '\n') {
      rows.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  rows.push_back(cur);
  while (!rows.empty() &&
         std::all_of(rows.back().begin(), rows.back().end(), [](char c) { return c == ' '; }))
    rows.pop_back();
  return rows;
}

}  // namespace

Layout::Layout(std::string name, int width, int height, std::vector<TileKind> tiles,
               std::array<Cell, 2> spawns)
    : name_(std::move(name)),
      width_(width),
      height_(height),
      tiles_(std::move(tiles)),
      spawns_(spawns) {
  if (width_ <= 0 || height_ <= 0 ||
      tiles_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
    throw LayoutError("layout dimensions do not match tile count");
  for (int i = 0; i < width_ * height_; ++i)
    by_kind_[static_cast<std::size_t>(tiles_[static_cast<std::size_t>(i)])].push_back(cell_at(i));
  for (int p = 0; p < 2; ++p) {
    if (!in_bounds(spawns_[p]) || !walkable(spawns_[p]))
      throw LayoutError("spawn " + std::to_string(p + 1) + " is not a floor tile", spawns_[p].row,
                        spawns_[p].col);
  }
  if (spawns_[0] == spawns_[1]) throw LayoutError("spawns coincide", spawns_[0].row, spawns_[0].col);
  if (pots().empty()) throw LayoutError("layout has no pot");
  if (cells_of(TileKind::delivery).empty()) throw LayoutError("layout has no delivery tile");
  if (cells_of(TileKind::onion_source).empty() && cells_of(TileKind::tomato_source).empty())
    throw LayoutError("layout has no ingredient source");
  if (cells_of(TileKind::plate_dispenser).empty()) throw LayoutError("layout has no plate dispenser");
}

int Layout::pot_index(Cell c) const {
  const auto& p = pots();
  auto it = std::find(p.begin(), p.end(), c);
  return it == p.end() ? -1 : static_cast<int>(it - p.begin());
}

LayoutPtr parse_layout(std::string_view text, std::string name) {
  const auto rows = split_rows(text);
  if (rows.empty()) throw LayoutError("empty layout");
  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  if (width == 0) throw LayoutError("empty first row", 0, 0);

  std::vector<TileKind> tiles;
  tiles.reserve(static_cast<std::size_t>(width * height));
  std::array<std::optional<Cell>, 2> spawns;
  for (int r = 0; r < height; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != width)
      throw LayoutError("non-rectangular grid: row has " + std::to_string(row.size()) +
                            " columns, expected " + std::to_string(width),
                        r, static_cast<int>(std::min<std::size_t>(row.size(), static_cast<std::size_t>(width))));
    for (int c = 0; c < width; ++c) {
      const char ch = row[static_cast<std::size_t>(c)];
      switch (ch) {
        case 'X': tiles.push_back(TileKind::counter); break;
        case ' ': tiles.push_back(TileKind::floor); break;
        case 'O': tiles.push_back(TileKind::onion_source); break;
        case 'T': tiles.push_back(TileKind::tomato_source); break;
        case 'D': tiles.push_back(TileKind::plate_dispenser); break;
        case 'P': tiles.push_back(TileKind::pot); break;
        case 'S': tiles.push_back(TileKind::delivery); break;
        case '1':
        case '2': {
          const int p = ch - '1';
          if (spawns[static_cast<std::size_t>(p)])
            throw LayoutError(std::string("duplicate spawn '") + ch + "'", r, c);
          spawns[static_cast<std::size_t>(p)] = Cell{c, r};
          tiles.push_back(TileKind::floor);
          break;
        }
        default:
          throw LayoutError(std::string("unknown layout character '") + ch + "'", r, c);
      }
    }
  }
  for (int p = 0; p < 2; ++p)
    if (!spawns[static_cast<std::size_t>(p)]) throw LayoutError("missing spawn '" + std::to_string(p + 1) + "'");
  return std::make_shared<const Layout>(std::move(name), width, height, std::move(tiles),
                                        std::array<Cell, 2>{*spawns[0], *spawns[1]});
}

std::string serialize_layout(const Layout& layout) {
  std::string out;
  for (int r = 0; r < layout.height(); ++r) {
    if (r > 0) out.push_back('\n');
    for (int c = 0; c < layout.width(); ++c) {
      const Cell cell{c, r};
      if (cell == layout.spawns()[0])
        out.push_back('1');
      else if (cell == layout.spawns()[1])
        out.push_back('2');
      else
        out.push_back(tile_char(layout.tile(cell)));
    }
  }
  return out;
}

std::string canonical_layout_text(std::string_view text) {
  const auto rows = split_rows(text);
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += rows[i];
  }
  return out;
}

std::vector<std::string> layout_names() {
  std::vector<std::string> names;
  for (const auto& b : kBuiltins) names.emplace_back(b.name);
  return names;
}

std::string_view layout_text(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return b.text;
  throw LayoutError("unknown layout name '" + std::string(name) + "'");
}

LayoutPtr builtin_layout(std::string_view name) {
  static const std::map<std::string, LayoutPtr, std::less<>> cache = [] {
    std::map<std::string, LayoutPtr, std::less<>> m;
    for (const auto& b : kBuiltins) m.emplace(std::string(b.name), parse_layout(b.text, std::string(b.name)));
    return m;
  }();
  auto it = cache.find(name);
  if (it == cache.end()) throw LayoutError("unknown layout name '" + std::string(name) + "'");
  return it->second;
}

}  // namespace influence
