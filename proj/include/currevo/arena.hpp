#ifndef CURREVO_ARENA_HPP
#define CURREVO_ARENA_HPP

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <currevo/rng.hpp>

namespace currevo {

    inline constexpr int k_arena_tiles = 15;
    inline constexpr double k_arena_side = 1.0;
    inline constexpr double k_tile_side = k_arena_side / k_arena_tiles;
    /// 15 rows of 15 characters plus 14 separators.
    inline constexpr std::size_t k_arena_text_length = k_arena_tiles * k_arena_tiles + k_arena_tiles - 1;

    enum class Tile : char { Start = 's', Target = 't', Wall = 'w', Empty = 'e' };

    struct TileIndex {
        int row = 0;
        int col = 0;
        friend bool operator==(const TileIndex&, const TileIndex&) = default;
    };

    using TileGrid = std::array<std::array<Tile, k_arena_tiles>, k_arena_tiles>;

    class ArenaError : public std::runtime_error {
    public:
        enum class Kind { BadDimensions, BadCharacter, StartCount, TargetCount, Unreachable, GenerationExhausted };

        ArenaError(Kind kind, std::string message, int count = 0, std::size_t position = 0)
            : std::runtime_error(std::move(message)), _kind(kind), _count(count), _position(position) {}

        Kind kind() const { return _kind; }
        /// Number of 's' / 't' found for StartCount / TargetCount.
        int count() const { return _count; }
        /// Character offset into the input text for BadCharacter.
        std::size_t position() const { return _position; }

    private:
        Kind _kind;
        int _count;
        std::size_t _position;
    };

    /// A validated 15x15 arena. Only obtainable through parse_arena (or helpers
    /// built on it), so every instance satisfies the validity rules.
    class Arena {
    public:
        const TileGrid& grid() const { return _grid; }
        Tile at(int row, int col) const { return _grid[row][col]; }
        TileIndex start_tile() const { return _start; }
        TileIndex target_tile() const { return _target; }
        const std::string& source_text() const { return _text; }
        int wall_count() const
        {
            int n = 0;
            for (const auto& row : _grid)
                for (Tile t : row)
                    n += t == Tile::Wall;
            return n;
        }

        friend bool operator==(const Arena& a, const Arena& b) { return a._text == b._text; }

    private:
        friend Arena parse_arena(std::string_view text);
        TileGrid _grid{};
        TileIndex _start;
        TileIndex _target;
        std::string _text;
    };

    namespace detail {
        inline bool is_free(Tile t) { return t != Tile::Wall; }
    } // namespace detail

    /// 4-connected flood fill over non-wall tiles.
    inline bool tiles_connected(const TileGrid& grid, TileIndex from, TileIndex to)
    {
        std::array<std::array<bool, k_arena_tiles>, k_arena_tiles> seen{};
        std::deque<TileIndex> open{from};
        seen[from.row][from.col] = true;
        constexpr int dr[4] = {-1, 1, 0, 0};
        constexpr int dc[4] = {0, 0, -1, 1};
        while (!open.empty()) {
            const TileIndex cur = open.front();
            open.pop_front();
            if (cur == to)
                return true;
            for (int d = 0; d < 4; ++d) {
                const int r = cur.row + dr[d];
                const int c = cur.col + dc[d];
                if (r < 0 || r >= k_arena_tiles || c < 0 || c >= k_arena_tiles || seen[r][c] || !detail::is_free(grid[r][c]))
                    continue;
                seen[r][c] = true;
                open.push_back({r, c});
            }
        }
        return false;
    }

    /// Canonical form: lowercase, whitespace removed, trailing '|' dropped.
    inline std::string canonicalize(std::string_view text)
    {
        std::string out;
        out.reserve(text.size());
        for (char ch : text) {
            if (std::isspace(static_cast<unsigned char>(ch)))
                continue;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
        while (!out.empty() && out.back() == '|')
            out.pop_back();
        return out;
    }

    inline std::string render_text(const Arena& arena)
    {
        std::string out;
        out.reserve(k_arena_text_length);
        for (int r = 0; r < k_arena_tiles; ++r) {
            if (r > 0)
                out.push_back('|');
            for (int c = 0; c < k_arena_tiles; ++c)
                out.push_back(static_cast<char>(arena.at(r, c)));
        }
        return out;
    }

    inline Arena parse_arena(std::string_view text)
    {
        using Kind = ArenaError::Kind;
        const std::string canon = canonicalize(text);

        std::vector<std::string_view> rows;
        {
            std::string_view rest = canon;
            for (;;) {
                const auto bar = rest.find('|');
                rows.push_back(rest.substr(0, bar));
                if (bar == std::string_view::npos)
                    break;
                rest.remove_prefix(bar + 1);
            }
        }
        if (rows.size() != static_cast<std::size_t>(k_arena_tiles))
            throw ArenaError(Kind::BadDimensions, "arena must have exactly 15 rows separated by '|', found " + std::to_string(rows.size()) + " rows");
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (rows[r].size() != static_cast<std::size_t>(k_arena_tiles))
                throw ArenaError(Kind::BadDimensions, "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) + " characters, expected exactly 15");

        Arena arena;
        int starts = 0;
        int targets = 0;
        for (int r = 0; r < k_arena_tiles; ++r) {
            for (int c = 0; c < k_arena_tiles; ++c) {
                const char ch = rows[r][c];
                switch (ch) {
                case 's':
                    ++starts;
                    arena._start = {r, c};
                    break;
                case 't':
                    ++targets;
                    arena._target = {r, c};
                    break;
                case 'w':
                case 'e':
                    break;
                default: {
                    const std::size_t pos = static_cast<std::size_t>(r) * (k_arena_tiles + 1) + c;
                    throw ArenaError(Kind::BadCharacter,
                                     std::string("invalid character '") + ch + "' at row " + std::to_string(r) + ", column " + std::to_string(c) + "; allowed characters are s, t, w, e",
                                     0, pos);
                }
                }
                arena._grid[r][c] = static_cast<Tile>(ch);
            }
        }
        if (starts != 1)
            throw ArenaError(Kind::StartCount, "arena must contain exactly one start 's', found " + std::to_string(starts), starts);
        if (targets != 1)
            throw ArenaError(Kind::TargetCount, "arena must contain exactly one target 't', found " + std::to_string(targets), targets);
        if (!tiles_connected(arena._grid, arena._start, arena._target))
            throw ArenaError(Kind::Unreachable, "the target is not reachable from the start: no path of horizontally/vertically adjacent non-wall tiles connects them");

        arena._text = canon;
        return arena;
    }

    inline Arena load_arena(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open arena file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_arena(ss.str());
    }

    inline void save_arena(const Arena& arena, const std::string& path)
    {
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write arena file: " + path);
        out << arena.source_text() << '\n';
    }

    // ---------------------------------------------------------------- geometry

    struct Vec2 {
        double x = 0.0;
        double y = 0.0;
        friend bool operator==(const Vec2&, const Vec2&) = default;
    };

    inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

    struct Rect {
        double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
        friend bool operator==(const Rect&, const Rect&) = default;
    };

    /// Continuous view of an arena: unit square, one rect per wall tile.
    /// `occupied` mirrors wall_rects on the tile lattice for fast lookups.
    struct WorldGeometry {
        Rect bounds{0.0, 0.0, k_arena_side, k_arena_side};
        std::vector<Rect> wall_rects;
        Vec2 start_pos;
        Vec2 target_pos;
        std::array<std::array<bool, k_arena_tiles>, k_arena_tiles> occupied{}; // [col][row-from-bottom]
    };

    inline Rect tile_rect(int row, int col)
    {
        return {col * k_tile_side, (k_arena_tiles - 1 - row) * k_tile_side, (col + 1) * k_tile_side, (k_arena_tiles - row) * k_tile_side};
    }

    inline Vec2 tile_center(TileIndex t)
    {
        return {(t.col + 0.5) * k_tile_side, (k_arena_tiles - 1 - t.row + 0.5) * k_tile_side};
    }

    inline WorldGeometry to_world(const Arena& arena)
    {
        WorldGeometry world;
        for (int r = 0; r < k_arena_tiles; ++r)
            for (int c = 0; c < k_arena_tiles; ++c)
                if (arena.at(r, c) == Tile::Wall) {
                    world.wall_rects.push_back(tile_rect(r, c));
                    world.occupied[c][k_arena_tiles - 1 - r] = true;
                }
        world.start_pos = tile_center(arena.start_tile());
        world.target_pos = tile_center(arena.target_tile());
        return world;
    }

    /// Wall-free world with arbitrary (not tile-centred) start and target.
    inline WorldGeometry open_world(Vec2 start, Vec2 target)
    {
        WorldGeometry world;
        world.start_pos = start;
        world.target_pos = target;
        return world;
    }

    // ---------------------------------------------------------------- random

    struct RandomArenaParams {
        int min_segments = 1;
        int max_segments = 4;
        int min_length = 2;
        int max_length = 8;
        bool horizontal = true;
        bool vertical = true;
    };

    inline constexpr int k_max_generation_attempts = 1000;

    inline Arena generate_random_arena(Rng& rng, const RandomArenaParams& params = {})
    {
        const bool bad_params = params.min_segments < 0 || params.max_segments < params.min_segments || params.min_length < 1
            || params.max_length < params.min_length || params.max_length > k_arena_tiles || (params.max_segments > 0 && !params.horizontal && !params.vertical);
        if (bad_params)
            throw ArenaError(ArenaError::Kind::GenerationExhausted, "invalid random arena parameters");

        for (int attempt = 0; attempt < k_max_generation_attempts; ++attempt) {
            TileGrid grid;
            for (auto& row : grid)
                row.fill(Tile::Empty);

            const int segments = uniform_int(rng, params.min_segments, params.max_segments);
            for (int s = 0; s < segments; ++s) {
                bool horizontal = params.horizontal;
                if (params.horizontal && params.vertical)
                    horizontal = uniform_int(rng, 0, 1) == 0;
                const int len = uniform_int(rng, params.min_length, params.max_length);
                const int fixed = uniform_int(rng, 0, k_arena_tiles - 1);
                const int first = uniform_int(rng, 0, k_arena_tiles - len);
                for (int i = 0; i < len; ++i) {
                    if (horizontal)
                        grid[fixed][first + i] = Tile::Wall;
                    else
                        grid[first + i][fixed] = Tile::Wall;
                }
            }

            std::vector<TileIndex> free;
            for (int r = 0; r < k_arena_tiles; ++r)
                for (int c = 0; c < k_arena_tiles; ++c)
                    if (grid[r][c] == Tile::Empty)
                        free.push_back({r, c});
            if (free.size() < 2)
                continue;
            const int si = uniform_int(rng, 0, static_cast<int>(free.size()) - 1);
            int ti = uniform_int(rng, 0, static_cast<int>(free.size()) - 2);
            if (ti >= si)
                ++ti;
            const TileIndex start = free[si];
            const TileIndex target = free[ti];
            if (!tiles_connected(grid, start, target))
                continue;
            grid[start.row][start.col] = Tile::Start;
            grid[target.row][target.col] = Tile::Target;

            std::string text;
            for (int r = 0; r < k_arena_tiles; ++r) {
                if (r > 0)
                    text.push_back('|');
                for (int c = 0; c < k_arena_tiles; ++c)
                    text.push_back(static_cast<char>(grid[r][c]));
            }
            return parse_arena(text);
        }
        throw ArenaError(ArenaError::Kind::GenerationExhausted,
                         "no valid arena found within " + std::to_string(k_max_generation_attempts) + " attempts");
    }

} // namespace currevo

#endif
