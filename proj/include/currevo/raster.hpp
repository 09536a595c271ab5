#ifndef CURREVO_RASTER_HPP
#define CURREVO_RASTER_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <currevo/scene.hpp>

namespace currevo {

    namespace detail {
        inline cv::Scalar bgr(Color c) { return {static_cast<double>(c.b), static_cast<double>(c.g), static_cast<double>(c.r)}; }
        inline cv::Point px(Point p, double s) { return {static_cast<int>(std::lround(p.x * s)), static_cast<int>(std::lround(p.y * s))}; }
        inline int thickness(double w, double s) { return std::max(1, static_cast<int>(std::lround(w * s))); }

        inline void draw_text(cv::Mat& img, const shape::Text& t, double s)
        {
            const int font = cv::FONT_HERSHEY_SIMPLEX;
            const double scale = t.size * s / 30.0;
            const int thick = std::max(1, static_cast<int>(std::lround(scale * 1.2)));
            int baseline = 0;
            const cv::Size size = cv::getTextSize(t.text, font, scale, thick, &baseline);
            const double shift = t.anchor == shape::Anchor::Start ? 0.0 : (t.anchor == shape::Anchor::Middle ? size.width / 2.0 : size.width);
            if (!t.vertical) {
                cv::putText(img, t.text, {static_cast<int>(std::lround(t.at.x * s - shift)), static_cast<int>(std::lround(t.at.y * s))}, font, scale, bgr(t.fill), thick, cv::LINE_AA);
                return;
            }
            cv::Mat tile(size.height + baseline + 2, size.width + 2, CV_8UC3, cv::Scalar(255, 255, 255));
            cv::putText(tile, t.text, {1, size.height + 1}, font, scale, bgr(t.fill), thick, cv::LINE_AA);
            cv::Mat rotated;
            cv::rotate(tile, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
            const int x0 = static_cast<int>(std::lround(t.at.x * s)) - rotated.cols + baseline;
            const int y0 = static_cast<int>(std::lround(t.at.y * s + shift)) - rotated.rows;
            const cv::Rect dst = cv::Rect(x0, y0, rotated.cols, rotated.rows) & cv::Rect(0, 0, img.cols, img.rows);
            if (dst.area() == 0)
                return;
            const cv::Rect src(dst.x - x0, dst.y - y0, dst.width, dst.height);
            cv::Mat mask;
            cv::inRange(rotated(src), cv::Scalar(0, 0, 0), cv::Scalar(254, 254, 254), mask);
            rotated(src).copyTo(img(dst), mask);
        }
    } // namespace detail

    /// Raster rendering of a scene at `scale` pixels per scene unit. Dash
    /// patterns are drawn solid.
    inline cv::Mat rasterize(const Scene& scene, double scale = 1.0)
    {
        using namespace detail;
        cv::Mat img(static_cast<int>(std::lround(scene.height * scale)), static_cast<int>(std::lround(scene.width * scale)), CV_8UC3, cv::Scalar(255, 255, 255));
        for (const Shape& s : scene.shapes) {
            if (const auto* l = std::get_if<shape::Line>(&s)) {
                cv::line(img, px(l->a, scale), px(l->b, scale), bgr(l->stroke), thickness(l->width, scale), cv::LINE_AA);
            }
            else if (const auto* p = std::get_if<shape::Polyline>(&s)) {
                std::vector<cv::Point> pts;
                for (Point q : p->points)
                    pts.push_back(px(q, scale));
                if (pts.size() == 1)
                    cv::circle(img, pts[0], thickness(p->width, scale), bgr(p->stroke), cv::FILLED, cv::LINE_AA);
                else if (!pts.empty())
                    cv::polylines(img, pts, false, bgr(p->stroke), thickness(p->width, scale), cv::LINE_AA);
            }
            else if (const auto* r = std::get_if<shape::Rect>(&s)) {
                const cv::Point a = px({r->x, r->y}, scale), b = px({r->x + r->w, r->y + r->h}, scale);
                if (r->filled)
                    cv::rectangle(img, a, b, bgr(r->fill), cv::FILLED);
                if (r->stroke_width > 0)
                    cv::rectangle(img, a, b, bgr(r->stroke), thickness(r->stroke_width, scale), cv::LINE_AA);
            }
            else if (const auto* c = std::get_if<shape::Circle>(&s)) {
                cv::circle(img, px(c->c, scale), std::max(1, static_cast<int>(std::lround(c->r * scale))), bgr(c->fill), cv::FILLED, cv::LINE_AA);
            }
            else if (const auto* t = std::get_if<shape::Text>(&s)) {
                draw_text(img, *t, scale);
            }
        }
        return img;
    }

    inline std::vector<unsigned char> to_png(const Scene& scene, double scale = 1.0)
    {
        std::vector<unsigned char> out;
        if (!cv::imencode(".png", rasterize(scene, scale), out))
            throw std::runtime_error("PNG encoding failed");
        return out;
    }

} // namespace currevo

#endif
