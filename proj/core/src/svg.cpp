#include "cornerseg/svg.hpp"

#include <cstdio>
#include <sstream>

namespace cornerseg {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void polygon(std::ostringstream& out, const RotatedRect& r, const char* color) {
    out << "  <polygon points=\"";
    for (int i = 0; i < 4; ++i) {
        if (i) out << ' ';
        out << fmt(r.corners[i].x) << ',' << fmt(r.corners[i].y);
    }
    out << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
}

}  // namespace

std::string render_overlay_svg(int width, int height, std::span<const RotatedRect> ground_truth,
                               std::span<const Detection> detections) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const RotatedRect& r : ground_truth) polygon(out, r, "green");
    for (const Detection& d : detections) {
        polygon(out, d.rect, "red");
        out << "  <text x=\"" << fmt(d.rect.tl().x) << "\" y=\"" << fmt(d.rect.tl().y - 2.0)
            << "\" font-size=\"10\" fill=\"red\">" << fmt(d.score) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace cornerseg
