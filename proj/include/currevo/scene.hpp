#ifndef CURREVO_SCENE_HPP
#define CURREVO_SCENE_HPP

#include <cstdio>
#include <string>
#include <variant>
#include <vector>

namespace currevo {

    struct Color {
        unsigned char r = 0, g = 0, b = 0;
        std::string hex() const
        {
            char buf[8];
            std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
            return buf;
        }
    };

    struct Point {
        double x = 0.0, y = 0.0;
    };

    namespace shape {
        struct Line {
            Point a, b;
            Color stroke;
            double width = 1.0;
        };
        struct Polyline {
            std::vector<Point> points;
            Color stroke;
            double width = 1.0;
            std::string dash; // SVG dash array, empty for solid
            std::string cls;
        };
        struct Rect {
            double x = 0, y = 0, w = 0, h = 0;
            Color fill;
            bool filled = true;
            Color stroke;
            double stroke_width = 0.0;
            std::string cls;
        };
        struct Circle {
            Point c;
            double r = 1.0;
            Color fill;
            std::string cls;
        };
        enum class Anchor { Start, Middle, End };
        struct Text {
            Point at;
            std::string text;
            double size = 12.0;
            Anchor anchor = Anchor::Start;
            bool vertical = false;
            Color fill;
        };
    } // namespace shape

    using Shape = std::variant<shape::Line, shape::Polyline, shape::Rect, shape::Circle, shape::Text>;

    /// Resolution-independent drawing in pixel units, y growing downwards.
    struct Scene {
        int width = 0;
        int height = 0;
        std::vector<Shape> shapes;

        template <typename S>
        void add(S s) { shapes.emplace_back(std::move(s)); }

        template <typename S>
        std::size_t count() const
        {
            std::size_t n = 0;
            for (const Shape& s : shapes)
                n += std::holds_alternative<S>(s);
            return n;
        }
    };

    /// A rendered image in both encodings.
    struct ImageArtifact {
        std::string name;    // file stem, e.g. feedback-progression
        std::string caption; // one line shown next to the image in the prompt
        std::string svg;
        std::vector<unsigned char> png;
    };

    namespace detail {
        inline std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", v);
            std::string s = buf;
            while (s.back() == '0')
                s.pop_back();
            if (s.back() == '.')
                s.pop_back();
            return s == "-0" ? "0" : s;
        }

        inline std::string xml_escape(const std::string& in)
        {
            std::string out;
            for (char c : in) {
                switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
                }
            }
            return out;
        }

        inline std::string class_attr(const std::string& cls) { return cls.empty() ? "" : " class=\"" + cls + "\""; }
    } // namespace detail

    inline std::string to_svg(const Scene& scene)
    {
        using detail::num;
        std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(scene.width) + "\" height=\"" + std::to_string(scene.height) +
               "\" viewBox=\"0 0 " + std::to_string(scene.width) + " " + std::to_string(scene.height) + "\">\n";
        out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(scene.width) + "\" height=\"" + std::to_string(scene.height) + "\" fill=\"#ffffff\"/>\n";
        for (const Shape& s : scene.shapes) {
            if (const auto* l = std::get_if<shape::Line>(&s)) {
                out += "<line x1=\"" + num(l->a.x) + "\" y1=\"" + num(l->a.y) + "\" x2=\"" + num(l->b.x) + "\" y2=\"" + num(l->b.y) + "\" stroke=\"" + l->stroke.hex() +
                       "\" stroke-width=\"" + num(l->width) + "\"/>\n";
            }
            else if (const auto* p = std::get_if<shape::Polyline>(&s)) {
                out += "<polyline" + detail::class_attr(p->cls) + " fill=\"none\" stroke=\"" + p->stroke.hex() + "\" stroke-width=\"" + num(p->width) + "\"";
                if (!p->dash.empty())
                    out += " stroke-dasharray=\"" + p->dash + "\"";
                out += " points=\"";
                for (std::size_t i = 0; i < p->points.size(); ++i)
                    out += (i ? " " : "") + num(p->points[i].x) + "," + num(p->points[i].y);
                out += "\"/>\n";
            }
            else if (const auto* r = std::get_if<shape::Rect>(&s)) {
                out += "<rect" + detail::class_attr(r->cls) + " x=\"" + num(r->x) + "\" y=\"" + num(r->y) + "\" width=\"" + num(r->w) + "\" height=\"" + num(r->h) + "\" fill=\"" +
                       (r->filled ? r->fill.hex() : std::string("none")) + "\"";
                if (r->stroke_width > 0)
                    out += " stroke=\"" + r->stroke.hex() + "\" stroke-width=\"" + num(r->stroke_width) + "\"";
                out += "/>\n";
            }
            else if (const auto* c = std::get_if<shape::Circle>(&s)) {
                out += "<circle" + detail::class_attr(c->cls) + " cx=\"" + num(c->c.x) + "\" cy=\"" + num(c->c.y) + "\" r=\"" + num(c->r) + "\" fill=\"" + c->fill.hex() + "\"/>\n";
            }
            else if (const auto* t = std::get_if<shape::Text>(&s)) {
                static constexpr const char* anchors[] = {"start", "middle", "end"};
                out += "<text x=\"" + num(t->at.x) + "\" y=\"" + num(t->at.y) + "\" font-family=\"sans-serif\" font-size=\"" + num(t->size) + "\" text-anchor=\"" +
                       anchors[static_cast<int>(t->anchor)] + "\" fill=\"" + t->fill.hex() + "\"";
                if (t->vertical)
                    out += " transform=\"rotate(-90 " + num(t->at.x) + " " + num(t->at.y) + ")\"";
                out += ">" + detail::xml_escape(t->text) + "</text>\n";
            }
        }
        out += "</svg>\n";
        return out;
    }

} // namespace currevo

#endif
