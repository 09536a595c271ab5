#ifndef CURREVO_GP_HPP
#define CURREVO_GP_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <currevo/rng.hpp>

namespace currevo {

    inline constexpr int k_input_count = 21;
    inline constexpr int k_max_tree_depth = 10;
    inline constexpr int k_min_init_depth = 4;
    inline constexpr double k_const_min = -5.0;
    inline constexpr double k_const_max = 5.0;
    inline constexpr double k_protect_eps = 1e-10;
    inline constexpr double k_constant_sigma = 0.25;

    enum class Op : std::uint8_t { Add, Sub, Mul, PDiv, PLog, Max, Min, Tanh, Gt, Lt, If3, Var, Const };

    inline constexpr int k_function_count = 11;

    inline constexpr int arity(Op op)
    {
        switch (op) {
        case Op::PLog:
        case Op::Tanh:
            return 1;
        case Op::If3:
            return 3;
        case Op::Var:
        case Op::Const:
            return 0;
        default:
            return 2;
        }
    }

    inline constexpr std::string_view op_name(Op op)
    {
        constexpr std::array<std::string_view, k_function_count> names = {"add", "sub", "mul", "pdiv", "plog", "max", "min", "tanh", "gt", "lt", "if3"};
        return names[static_cast<int>(op)];
    }

    struct Node {
        Op op = Op::Const;
        std::uint8_t var = 0;
        double value = 0.0;
        friend bool operator==(const Node&, const Node&) = default;
    };

    /// Immutable GP tree stored in prefix order, with the (exclusive) end of
    /// every node's subtree cached for skipping.
    class PolicyExpr {
    public:
        PolicyExpr() : PolicyExpr(std::vector<Node>{Node{Op::Const, 0, 0.0}}) {}

        explicit PolicyExpr(std::vector<Node> nodes) : _nodes(std::move(nodes))
        {
            _ends.resize(_nodes.size());
            const std::size_t end = _index(0);
            if (end != _nodes.size())
                throw std::invalid_argument("prefix node list is not a single well-formed tree");
        }

        static PolicyExpr constant(double v) { return PolicyExpr({Node{Op::Const, 0, v}}); }
        static PolicyExpr variable(int index) { return PolicyExpr({Node{Op::Var, static_cast<std::uint8_t>(index), 0.0}}); }

        const std::vector<Node>& nodes() const { return _nodes; }
        std::size_t size() const { return _nodes.size(); }
        std::size_t subtree_end(std::size_t i) const { return _ends[i]; }

        /// A lone leaf has depth 1.
        int depth() const { return _depth_at(0); }

        /// Depth of each node counted from the root (root = 1).
        std::vector<int> node_levels() const
        {
            std::vector<int> levels(_nodes.size(), 1);
            for (std::size_t i = 0; i < _nodes.size(); ++i) {
                std::size_t child = i + 1;
                for (int a = 0; a < arity(_nodes[i].op); ++a) {
                    levels[child] = levels[i] + 1;
                    child = _ends[child];
                }
            }
            return levels;
        }

        int constant_count() const
        {
            return static_cast<int>(std::count_if(_nodes.begin(), _nodes.end(), [](const Node& n) { return n.op == Op::Const; }));
        }

        friend bool operator==(const PolicyExpr& a, const PolicyExpr& b) { return a._nodes == b._nodes; }

    private:
        std::size_t _index(std::size_t i)
        {
            if (i >= _nodes.size())
                throw std::invalid_argument("prefix node list ends inside a subtree");
            const Node& n = _nodes[i];
            if (n.op == Op::Var && n.var >= k_input_count)
                throw std::invalid_argument("variable index out of range");
            std::size_t next = i + 1;
            for (int a = 0; a < arity(n.op); ++a)
                next = _index(next);
            _ends[i] = next;
            return next;
        }

        int _depth_at(std::size_t i) const
        {
            int deepest = 0;
            std::size_t child = i + 1;
            for (int a = 0; a < arity(_nodes[i].op); ++a) {
                deepest = std::max(deepest, _depth_at(child));
                child = _ends[child];
            }
            return deepest + 1;
        }

        std::vector<Node> _nodes;
        std::vector<std::size_t> _ends;
    };

    // ---------------------------------------------------------------- evaluation

    namespace detail {
        // Arithmetic saturates at the largest finite double instead of overflowing.
        inline double saturate(double x)
        {
            constexpr double hi = std::numeric_limits<double>::max();
            return x > hi ? hi : (x < -hi ? -hi : x);
        }

        inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

        inline double eval_at(const PolicyExpr& expr, std::size_t i, std::span<const double> in)
        {
            const Node& n = expr.nodes()[i];
            const std::size_t a = i + 1;
            switch (n.op) {
            case Op::Var:
                return in[n.var];
            case Op::Const:
                return n.value;
            case Op::Tanh:
                return std::tanh(eval_at(expr, a, in));
            case Op::PLog: {
                const double x = eval_at(expr, a, in);
                return std::abs(x) >= k_protect_eps ? std::log(std::abs(x)) : 0.0;
            }
            case Op::If3: {
                const std::size_t b = expr.subtree_end(a);
                const double cond = eval_at(expr, a, in);
                return cond > 0.0 ? eval_at(expr, b, in) : eval_at(expr, expr.subtree_end(b), in);
            }
            default:
                break;
            }
            const double x = eval_at(expr, a, in);
            const double y = eval_at(expr, expr.subtree_end(a), in);
            switch (n.op) {
            case Op::Add:
                return saturate(x + y);
            case Op::Sub:
                return saturate(x - y);
            case Op::Mul:
                return saturate(x * y);
            case Op::PDiv:
                return std::abs(y) >= k_protect_eps ? saturate(x / y) : 1.0;
            case Op::Max:
                return std::max(x, y);
            case Op::Min:
                return std::min(x, y);
            case Op::Gt:
                return sign_of(x - y);
            case Op::Lt:
                return sign_of(y - x);
            default:
                return 0.0;
            }
        }
    } // namespace detail

    inline double eval_expr(const PolicyExpr& expr, std::span<const double> inputs)
    {
        if (inputs.size() < static_cast<std::size_t>(k_input_count))
            throw std::invalid_argument("eval_expr needs 21 inputs");
        return detail::eval_at(expr, 0, inputs);
    }

    // ---------------------------------------------------------------- construction

    enum class InitMode { Full, Grow };

    namespace detail {
        inline Node random_terminal(Rng& rng)
        {
            if (uniform01(rng) < 0.5)
                return Node{Op::Var, static_cast<std::uint8_t>(uniform_int(rng, 0, k_input_count - 1)), 0.0};
            return Node{Op::Const, 0, std::uniform_real_distribution<double>(k_const_min, k_const_max)(rng)};
        }

        inline Node random_function(Rng& rng) { return Node{static_cast<Op>(uniform_int(rng, 0, k_function_count - 1)), 0, 0.0}; }

        /// Appends a random subtree rooted at `level`; every branch reaches at
        /// least `min_depth` and none exceeds `max_depth`. Grow mode stops a
        /// branch early with probability 1/2 once min_depth is satisfied.
        inline void build(Rng& rng, std::vector<Node>& out, int level, int min_depth, int max_depth, bool full)
        {
            bool terminal;
            if (level >= max_depth)
                terminal = true;
            else if (full || level < min_depth)
                terminal = false;
            else
                terminal = uniform01(rng) < 0.5;
            if (terminal) {
                out.push_back(random_terminal(rng));
                return;
            }
            const Node f = random_function(rng);
            out.push_back(f);
            for (int c = 0; c < arity(f.op); ++c)
                build(rng, out, level + 1, min_depth, max_depth, full);
        }
    } // namespace detail

    inline PolicyExpr random_tree(Rng& rng, InitMode mode, int depth_target)
    {
        if (depth_target < k_min_init_depth || depth_target > k_max_tree_depth)
            throw std::invalid_argument("depth_target must lie in [4, 10]");
        std::vector<Node> nodes;
        detail::build(rng, nodes, 1, k_min_init_depth, depth_target, mode == InitMode::Full);
        return PolicyExpr(std::move(nodes));
    }

    /// Ramped half-and-half: depths cycle through 4..10, modes alternate full/grow.
    inline std::vector<PolicyExpr> ramped_half_and_half(Rng& rng, std::size_t count)
    {
        std::vector<PolicyExpr> out;
        out.reserve(count);
        constexpr int span = k_max_tree_depth - k_min_init_depth + 1;
        for (std::size_t i = 0; i < count; ++i) {
            const int depth = k_min_init_depth + static_cast<int>(i % span);
            const InitMode mode = (i % 2 == 0) ? InitMode::Full : InitMode::Grow;
            out.push_back(random_tree(rng, mode, depth));
        }
        return out;
    }

    // ---------------------------------------------------------------- mutation

    /// Replaces a uniformly chosen node (root included) with a grow-built
    /// subtree whose height keeps the whole tree within the depth cap.
    inline PolicyExpr mutate_subtree(Rng& rng, const PolicyExpr& expr)
    {
        const auto& nodes = expr.nodes();
        const std::vector<int> levels = expr.node_levels();
        const std::size_t point = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(nodes.size()) - 1));
        const int allowed = k_max_tree_depth - levels[point] + 1;
        const int height = uniform_int(rng, 1, allowed);

        std::vector<Node> replacement;
        detail::build(rng, replacement, 1, 1, height, false);

        std::vector<Node> out;
        out.reserve(nodes.size() - (expr.subtree_end(point) - point) + replacement.size());
        out.insert(out.end(), nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(point));
        out.insert(out.end(), replacement.begin(), replacement.end());
        out.insert(out.end(), nodes.begin() + static_cast<std::ptrdiff_t>(expr.subtree_end(point)), nodes.end());
        return PolicyExpr(std::move(out));
    }

    /// Adds N(0, 0.25^2) noise to every constant leaf, drawing in prefix order.
    /// Falls back to subtree mutation when the tree has no constants.
    inline PolicyExpr mutate_constants(Rng& rng, const PolicyExpr& expr)
    {
        if (expr.constant_count() == 0)
            return mutate_subtree(rng, expr);
        std::normal_distribution<double> noise(0.0, k_constant_sigma);
        std::vector<Node> out = expr.nodes();
        for (Node& n : out)
            if (n.op == Op::Const)
                n.value += noise(rng);
        return PolicyExpr(std::move(out));
    }

    inline PolicyExpr mutate(Rng& rng, const PolicyExpr& expr)
    {
        if (uniform01(rng) < 0.5)
            return mutate_subtree(rng, expr);
        return mutate_constants(rng, expr);
    }

    // ---------------------------------------------------------------- text form

    class ExprParseError : public std::runtime_error {
    public:
        ExprParseError(const std::string& what, std::size_t position)
            : std::runtime_error(what + " at offset " + std::to_string(position)), _position(position) {}
        std::size_t position() const { return _position; }

    private:
        std::size_t _position;
    };

    namespace detail {
        inline void format_at(const PolicyExpr& expr, std::size_t i, std::string& out)
        {
            const Node& n = expr.nodes()[i];
            if (n.op == Op::Var) {
                out += 'v';
                out += std::to_string(n.var);
                return;
            }
            if (n.op == Op::Const) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                out += buf;
                return;
            }
            out += '(';
            out += op_name(n.op);
            std::size_t child = i + 1;
            for (int a = 0; a < arity(n.op); ++a) {
                out += ' ';
                format_at(expr, child, out);
                child = expr.subtree_end(child);
            }
            out += ')';
        }

        class ExprParser {
        public:
            explicit ExprParser(std::string_view text) : _text(text) {}

            PolicyExpr parse()
            {
                std::vector<Node> nodes;
                _expr(nodes);
                _skip_space();
                if (_pos != _text.size())
                    throw ExprParseError("trailing characters after expression", _pos);
                return PolicyExpr(std::move(nodes));
            }

        private:
            void _skip_space()
            {
                while (_pos < _text.size() && std::isspace(static_cast<unsigned char>(_text[_pos])))
                    ++_pos;
            }

            std::string_view _atom()
            {
                const std::size_t begin = _pos;
                while (_pos < _text.size() && !std::isspace(static_cast<unsigned char>(_text[_pos])) && _text[_pos] != '(' && _text[_pos] != ')')
                    ++_pos;
                return _text.substr(begin, _pos - begin);
            }

            void _expr(std::vector<Node>& nodes)
            {
                _skip_space();
                if (_pos >= _text.size())
                    throw ExprParseError("unexpected end of input (unbalanced parenthesis?)", _pos);
                if (_text[_pos] == ')')
                    throw ExprParseError("unexpected ')'", _pos);
                if (_text[_pos] == '(') {
                    const std::size_t open = _pos++;
                    _skip_space();
                    const std::size_t name_pos = _pos;
                    const std::string_view name = _atom();
                    Op op = Op::Const;
                    bool found = false;
                    for (int k = 0; k < k_function_count; ++k)
                        if (op_name(static_cast<Op>(k)) == name) {
                            op = static_cast<Op>(k);
                            found = true;
                        }
                    if (!found)
                        throw ExprParseError("unknown operator '" + std::string(name) + "'", name_pos);
                    nodes.push_back(Node{op, 0, 0.0});
                    for (int a = 0; a < arity(op); ++a)
                        _expr(nodes);
                    _skip_space();
                    if (_pos >= _text.size())
                        throw ExprParseError("unbalanced parenthesis: '(' opened at offset " + std::to_string(open) + " is never closed", _pos);
                    if (_text[_pos] != ')')
                        throw ExprParseError("operator '" + std::string(name) + "' takes " + std::to_string(arity(op)) + " arguments", _pos);
                    ++_pos;
                    return;
                }
                const std::size_t at = _pos;
                const std::string_view tok = _atom();
                if (tok.size() >= 2 && tok[0] == 'v') {
                    int index = -1;
                    const auto res = std::from_chars(tok.data() + 1, tok.data() + tok.size(), index);
                    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || index < 0 || index >= k_input_count)
                        throw ExprParseError("bad variable '" + std::string(tok) + "'", at);
                    nodes.push_back(Node{Op::Var, static_cast<std::uint8_t>(index), 0.0});
                    return;
                }
                double value = 0.0;
                const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
                if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(value))
                    throw ExprParseError("bad constant '" + std::string(tok) + "'", at);
                nodes.push_back(Node{Op::Const, 0, value});
            }

            std::string_view _text;
            std::size_t _pos = 0;
        };
    } // namespace detail

    /// Prefix s-expression, e.g. "(if3 (gt v3 0.2) (tanh v14) -1.5)".
    inline std::string format_expr(const PolicyExpr& expr)
    {
        std::string out;
        detail::format_at(expr, 0, out);
        return out;
    }

    inline PolicyExpr parse_expr(std::string_view text) { return detail::ExprParser(text).parse(); }

} // namespace currevo

#endif
