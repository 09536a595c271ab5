// Built-in arena sets; the same text ships under assets/arenas/.
#ifndef CURREVO_REFERENCE_ARENAS_HPP
#define CURREVO_REFERENCE_ARENAS_HPP

#include <array>
#include <string_view>
#include <vector>

#include <currevo/arena.hpp>

namespace currevo {

    /// Hand-made progressive curriculum: open arena, a single wall, longer and
    /// multiple walls, a corridor, a small maze.
    inline constexpr std::array<std::string_view, 8> k_expert_curriculum = {
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeseeeeeeeeteee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeseeeeweeeteee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeteee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeeeeeeweeeeeee|"
        "eeseeeeweeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeweeeeeeeee|"
        "eeeeeweeeeeeeee|"
        "eeeeeweeeweeeee|"
        "eeseeweeeweetee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeewwwwwweeee|"
        "eeeeeeeeeeweeee|"
        "eeeeeeeeeeweeee|"
        "eeseeeeeeeweete|"
        "eeeeeeeeeeweeee|"
        "eeeeeeeeeeweeee|"
        "eeeeewwwwwweeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "ewwwwwwwwwwwwee|"
        "eeeeeeeeeeeeeee|"
        "eseeeeeeeeeeete|"
        "eeeeeeeeeeeeeee|"
        "ewwwwwwwwwwwwee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeweeeeeweeeee|"
        "eeeweeeeeweeeee|"
        "eeeweeeeeweeeee|"
        "eeeweeweeweeeee|"
        "eseweeweeweeete|"
        "eeeeeeweeeeeeee|"
        "eeeeeeweeeeeeee|"
        "eeeeeeweeeeeeee|"
        "eeeeeeweeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "ewwwwwwwwwwwwwe|"
        "eeeeeeeeeeeeewe|"
        "ewwwwwwwwwweewe|"
        "eweeeeeeeeweewe|"
        "eweeweeeeeweewe|"
        "eweeweewwwweewe|"
        "esweweeeeteeewe|"
        "eeeweweeeeweewe|"
        "ewwweweeeeweeee|"
        "eweeewwwwwwwwwe|"
        "eweeeeeeeeeeeee|"
        "ewwwwwwwwwwwwwe|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",
    };

    /// Held-out arenas, never shown to the optimizer or the case designer.
    inline constexpr std::array<std::string_view, 6> k_test_arenas = {
        "eeeeeeeeeeeeeee|"
        "eteeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeewwwwweeeeee|"
        "eeeeeeeeweeeeee|"
        "eeeeeeeeweeeeee|"
        "eeeeeeeeweeeeee|"
        "eeeeeeeeweeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeese|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeewwweeeee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeweeeee|"
        "eteeeeeeeweeese|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeeeeweeeee|"
        "eeeeeeewwweeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeseeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eewwwwwwwwwwwee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeteeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeweeeeeeeeeee|"
        "eeeweeeewwwwwww|"
        "eeeweeeeeeeeeee|"
        "eseweeeeeeeeeee|"
        "eeeweeeeeeeeeee|"
        "eeeweeeeeeeeeee|"
        "eeeewwwwwwweeee|"
        "eeeeeeeeeeweeee|"
        "eeeeeeeeeeweete|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eewwwwwwwwwwwee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeewwwwwwww|"
        "eeeeeeeeeeeeeee|"
        "eseeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "wwwwwwweeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eewwwwwwwwwwwee|"
        "eeeeeeeeeeeeete|"
        "eeeeeeeeeeeeeee",

        "eeeeeeeeeeeeeee|"
        "eeeeewweeeeeeee|"
        "eeeeeweeeeeeeee|"
        "eeeeeweeewwwwee|"
        "eeeeeweeeeeeeee|"
        "eeeeeweeeeeeeee|"
        "eeeeeweeeeeweee|"
        "eeseeweetweweee|"
        "eeeeeweeeeeweee|"
        "eeeeeeeeeeeweee|"
        "eeeeeeeeeeeweee|"
        "eewwwwwweeeweee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee|"
        "eeeeeeeeeeeeeee",
    };

    template <std::size_t N>
    std::vector<Arena> parse_all(const std::array<std::string_view, N>& texts)
    {
        std::vector<Arena> out;
        for (std::string_view t : texts)
            out.push_back(parse_arena(std::string(t)));
        return out;
    }

    inline std::vector<Arena> expert_curriculum() { return parse_all(k_expert_curriculum); }
    inline std::vector<Arena> test_arenas() { return parse_all(k_test_arenas); }

} // namespace currevo

#endif
