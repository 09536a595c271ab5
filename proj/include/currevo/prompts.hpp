// Prompt templates sent to the case-designing model. Placeholders are
// written {{NAME}} and filled by render_template.
#ifndef CURREVO_PROMPTS_HPP
#define CURREVO_PROMPTS_HPP

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace currevo {

    inline constexpr std::string_view k_prompt_version = "1";

    inline constexpr std::array<std::string_view, 5> k_arena_constraints = {
        "The arena is a square grid of exactly 15 rows and 15 columns.",
        "Write the rows from top to bottom on a single line, separating consecutive rows with the character '|' and putting no '|' after the last row.",
        "Every tile is one lowercase letter: 's' for the start, 't' for the target, 'w' for a wall and 'e' for an empty tile.",
        "The arena contains exactly one 's' and exactly one 't'.",
        "The target must be reachable from the start through a chain of non-wall tiles, each step moving up, down, left or right.",
    };

    /// Valid arena shown to the model as a format illustration.
    inline constexpr std::string_view k_example_arena =
        "eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|"
        "eeeeeeeweeeeeee|eeeeeeeweeeeeee|eseeeeeweeeeete|eeeeeeeweeeeeee|eeeeeeeweeeeeee|"
        "eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|eeeeeeeeeeeeeee|eeeeeeeeeeeeeee";

    inline constexpr std::string_view k_context_template = R"(You are going to act as the designer of a training curriculum for a small mobile robot.

THE TASK
The robot lives in a flat square arena of 1 m by 1 m. It is a disc of radius 2 cm driven by two independent wheels (differential drive), with a top speed of 1 cm/s. It starts at the center of the start tile facing right, and it has 60 seconds to get as close as possible to the center of the target tile. Walls block the robot; touching a wall or the arena border simply stops its motion in that direction.
The robot perceives five proximity rays (pointing at -90, -45, 0, 45 and 90 degrees from its heading, each reaching at most 0.5 m), plus the distance and the relative angle to the target. It does not see the map.
Its controller is a symbolic expression evolved by a genetic programming algorithm that keeps an archive of diverse good controllers.

YOUR ROLE
You design the training cases{{ROLE_MODE}}. The optimizer trains on a bag of cases that only grows: at stage i it trains on all the cases you have given so far, in order, for a fixed number of fitness evaluations. There are {{N_STAGE}} stages in total. The final controller will be tested on arenas that neither you nor the optimizer will ever see, so aim for a sequence of cases that leads to a controller that reaches the target in arenas it has never met, for example by increasing difficulty gradually.

HOW QUALITY IS MEASURED
The quality of a controller on a case is a distance to the target in meters: 0.9 times the distance at the end of the episode plus 0.1 times the average distance during the episode. Lower is better; 0 means the robot sits on the target.

FEEDBACK YOU WILL RECEIVE
{{FEEDBACK_DESCRIPTION}}

ARENA FORMAT
{{CONSTRAINTS}}
Before answering, check these rules yourself, in particular trace a path from 's' to 't'.
Example of a valid arena (a short wall between start and target):
{{EXAMPLE_ARENA}}

RESPONSE FORMAT
{{RESPONSE_FORMAT}}

{{REQUEST}})";

    inline constexpr std::string_view k_feedback_numbers =
        "After every stage you will get three numbers about the best controller found so far: its quality on the newest case, its quality on each case in curriculum order, "
        "and its average quality over all cases.";
    inline constexpr std::string_view k_feedback_plot =
        " You will also get a plot of the quality of the best controller on each case against the number of fitness evaluations, across all stages so far.";
    inline constexpr std::string_view k_feedback_trajectories = " Finally, you will get one picture per case showing the path that the best controller drives in that arena.";

    inline constexpr std::string_view k_response_format =
        R"(Reply with ONE JSON object and nothing else. It must have exactly these keys, all with string values:
  "case": the new arena, written as described above,
  "understood": one or two sentences on what you understood of the task and of the latest feedback,
  "reasoning": why this case is a good next step for the curriculum.
For example: {"case": "<arena>", "understood": "...", "reasoning": "..."})";

    inline constexpr std::string_view k_recap =
        R"(Recall the format: return ONE JSON object with the string keys "case", "understood" and "reasoning", where "case" is a 15x15 arena with rows separated by '|', exactly one 's' and one 't', only the letters s, t, w, e, and a path from 's' to 't'.)";

    inline constexpr std::string_view k_static_response_format =
        R"(Reply with ONE JSON object and nothing else. It must have exactly these keys:
  "cases": a list of {{N_STAGE}} arenas (strings) in the order the optimizer should receive them,
  "understood": one or two sentences on what you understood of the task,
  "reasoning": why this sequence is a good curriculum.
For example: {"cases": ["<arena 1>", "<arena 2>", "..."], "understood": "...", "reasoning": "..."})";

    inline constexpr std::string_view k_static_feedback = "You will not receive any feedback: you must design the whole curriculum at once.";

    inline std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values)
    {
        std::string out;
        std::size_t i = 0;
        while (i < tmpl.size()) {
            const std::size_t open = tmpl.find("{{", i);
            if (open == std::string_view::npos) {
                out.append(tmpl.substr(i));
                break;
            }
            const std::size_t close = tmpl.find("}}", open);
            if (close == std::string_view::npos)
                throw std::invalid_argument("unterminated placeholder in prompt template");
            out.append(tmpl.substr(i, open - i));
            const std::string key(tmpl.substr(open + 2, close - open - 2));
            const auto it = values.find(key);
            if (it == values.end())
                throw std::invalid_argument("no value for prompt placeholder " + key);
            out += it->second;
            i = close + 2;
        }
        return out;
    }

    inline std::string constraints_text()
    {
        std::string out;
        for (std::size_t i = 0; i < k_arena_constraints.size(); ++i)
            out += "- " + std::string(k_arena_constraints[i]) + (i + 1 < k_arena_constraints.size() ? "\n" : "");
        return out;
    }

} // namespace currevo

#endif
