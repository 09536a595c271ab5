#ifndef CURREVO_CONTROLLER_HPP
#define CURREVO_CONTROLLER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <currevo/gp.hpp>
#include <currevo/sim.hpp>

namespace currevo {

    inline constexpr int k_raw_channels = 7;
    inline constexpr int k_history_length = 5;

    using NormalizedObservation = std::array<double, k_raw_channels>;
    /// Index 3*i + {0: current, 1: trend, 2: 5-step mean} for channel i, where
    /// channels 0..4 are the proximity rays, 5 is target distance, 6 is target angle.
    using AugmentedObservation = std::array<double, k_input_count>;

    /// Last five normalized observations. The first push fills every slot, so
    /// before five observations exist the earliest one stands in for the rest.
    class ObservationMemory {
    public:
        void reset() { _count = 0; }
        int size() const { return std::min(_count, k_history_length); }

        void push(const NormalizedObservation& n)
        {
            if (_count == 0)
                _slots.fill(n);
            else
                _slots[_count % k_history_length] = n;
            ++_count;
        }

        /// ago = 0 is the latest entry, ago = 4 the oldest retained one.
        const NormalizedObservation& back(int ago) const
        {
            const int latest = (_count - 1) % k_history_length;
            return _slots[(latest - ago + k_history_length) % k_history_length];
        }

    private:
        std::array<NormalizedObservation, k_history_length> _slots{};
        int _count = 0;
    };

    inline NormalizedObservation normalize(const RawObservation& raw, const SimParams& params = {})
    {
        NormalizedObservation n;
        const double scale = 2.0 / params.sensor_range; // [0, range] -> [-1, 1]
        for (int i = 0; i < k_proximity_rays; ++i)
            n[i] = scale * raw.proximity[i] - 1.0;
        n[5] = scale * raw.target_distance - 1.0;
        n[6] = raw.target_angle / std::numbers::pi;
        return n;
    }

    /// Trend is halved so that it stays in [-1, 1] like the other entries.
    inline AugmentedObservation normalize_and_augment(ObservationMemory& memory, const RawObservation& raw, const SimParams& params = {})
    {
        memory.push(normalize(raw, params));
        const NormalizedObservation& now = memory.back(0);
        const NormalizedObservation& then = memory.back(k_history_length - 1);
        AugmentedObservation out;
        for (int i = 0; i < k_raw_channels; ++i) {
            double sum = 0.0;
            for (int j = 0; j < k_history_length; ++j)
                sum += memory.back(j)[i];
            out[3 * i] = now[i];
            out[3 * i + 1] = 0.5 * (now[i] - then[i]);
            out[3 * i + 2] = sum / k_history_length;
        }
        return out;
    }

    inline WheelCommand postprocess(double a_prime, double v_max = SimParams{}.v_max)
    {
        const double t = std::tanh(a_prime);
        return {v_max * (1.0 + 2.0 * std::min(0.0, t)), v_max * (1.0 - 2.0 * std::max(0.0, t))};
    }

    /// Fixed outer controller wrapping an evolved tree. The tree must outlive
    /// the controller; memory is per-episode, so one controller per episode.
    class PolicyController {
    public:
        explicit PolicyController(const PolicyExpr& expr, const SimParams& params = {}) : _expr(&expr), _params(params) {}
        PolicyController(PolicyExpr&&, const SimParams& = {}) = delete;

        void reset() { _memory.reset(); }

        WheelCommand act(const RawObservation& raw)
        {
            const AugmentedObservation in = normalize_and_augment(_memory, raw, _params);
            return postprocess(eval_expr(*_expr, in), _params.v_max);
        }

        const ObservationMemory& memory() const { return _memory; }
        const PolicyExpr& expr() const { return *_expr; }

    private:
        const PolicyExpr* _expr;
        SimParams _params;
        ObservationMemory _memory;
    };

    inline WheelCommand control_step(PolicyController& controller, const RawObservation& raw) { return controller.act(raw); }

} // namespace currevo

#endif
