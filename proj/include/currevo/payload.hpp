#ifndef CURREVO_PAYLOAD_HPP
#define CURREVO_PAYLOAD_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <currevo/scene.hpp>

namespace currevo {

    enum class Modality { N, NP, NPB };

    inline std::string modality_name(Modality m) { return m == Modality::N ? "N" : (m == Modality::NP ? "NP" : "NPB"); }

    inline Modality parse_modality(const std::string& s)
    {
        if (s == "N")
            return Modality::N;
        if (s == "NP" || s == "N+P")
            return Modality::NP;
        if (s == "NPB" || s == "N+P+B")
            return Modality::NPB;
        throw std::invalid_argument("unknown feedback modality '" + s + "' (expected N, NP or NPB)");
    }

    inline bool has_images(Modality m) { return m != Modality::N; }

    struct FeedbackPayload {
        Modality modality = Modality::N;
        std::string metrics_text;
        std::optional<ImageArtifact> progression;
        std::vector<ImageArtifact> trajectories; // bag order

        std::vector<const ImageArtifact*> images() const
        {
            std::vector<const ImageArtifact*> out;
            if (progression)
                out.push_back(&*progression);
            for (const ImageArtifact& t : trajectories)
                out.push_back(&t);
            return out;
        }
    };

} // namespace currevo

#endif
