#include "c3bf/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace c3bf {

namespace {

constexpr double kWidth = 800.0;
constexpr double kPanelHeight = 360.0;
constexpr double kMargin = 50.0;

const char* kActiveColor = "#f28c28";  // filter modifying the input
const char* kPassiveColor = "#1f5fbf";
const char* kHActiveColor = "#d62728";

struct Box {
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;

    void add(double x, double y)
    {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    void pad()
    {
        if (!std::isfinite(x0)) *this = Box{0.0, 1.0, 0.0, 1.0};
        if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
        const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
        x0 -= mx; x1 += mx; y0 -= my; y1 += my;
    }
};

// Maps data coordinates into one panel. `equal` keeps a 1:1 aspect ratio.
struct Panel {
    Box box;
    double top = 0.0;
    double height = kPanelHeight;
    double sx = 1.0, sy = 1.0;

    Panel(Box b, double top_px, bool equal) : box(b), top(top_px)
    {
        box.pad();
        sx = (kWidth - 2 * kMargin) / (box.x1 - box.x0);
        sy = (height - 2 * kMargin) / (box.y1 - box.y0);
        if (equal) sx = sy = std::min(sx, sy);
    }
    double px(double x) const { return kMargin + (x - box.x0) * sx; }
    double py(double y) const { return top + height - kMargin - (y - box.y0) * sy; }
};

std::string num(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(6);
    os << v;
    return os.str();
}

void polyline(std::ostream& out, const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys,
              std::size_t from, std::size_t to, const char* color, double width, bool dashed = false)
{
    if (to <= from) return;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"";
    if (dashed) out << " stroke-dasharray=\"6,4\"";
    out << " points=\"";
    for (std::size_t i = from; i <= to && i < xs.size(); ++i) out << num(p.px(xs[i])) << ',' << num(p.py(ys[i])) << ' ';
    out << "\"/>\n";
}

// Splits a series into runs of equal `flag` and draws each run in its color.
void flagged_series(std::ostream& out, const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<bool>& flag, const char* on, const char* off, double width)
{
    if (xs.size() < 2) return;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= xs.size(); ++i) {
        if (i == xs.size() || flag[i] != flag[start]) {
            polyline(out, p, xs, ys, start, std::min(i, xs.size() - 1), flag[start] ? on : off, width);
            start = i;
        }
    }
}

void frame(std::ostream& out, const Panel& p, const std::string& title, const std::string& xlabel,
           const std::string& ylabel)
{
    const double l = kMargin, r = kWidth - kMargin, t = p.top + kMargin, b = p.top + p.height - kMargin;
    out << "<rect x=\"" << l << "\" y=\"" << num(t) << "\" width=\"" << (r - l) << "\" height=\"" << num(b - t)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << num(p.top + 30) << "\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << num(b + 35) << "\" text-anchor=\"middle\" font-size=\"12\">"
        << xlabel << "</text>\n";
    out << "<text x=\"15\" y=\"" << num((t + b) / 2) << "\" font-size=\"12\" transform=\"rotate(-90 15 "
        << num((t + b) / 2) << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = p.box.x0 + k * (p.box.x1 - p.box.x0) / 4.0;
        const double yv = p.box.y0 + k * (p.box.y1 - p.box.y0) / 4.0;
        out << "<text x=\"" << num(p.px(xv)) << "\" y=\"" << num(b + 15) << "\" font-size=\"10\" text-anchor=\"middle\">"
            << num(xv) << "</text>\n";
        out << "<text x=\"" << num(l - 4) << "\" y=\"" << num(p.py(yv) + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
            << num(yv) << "</text>\n";
    }
}

std::vector<bool> filter_active(const TrajectoryTable& t, const char* c0, const char* c1)
{
    const std::size_t r0 = t.column(std::string("u_ref_") + c0), r1 = t.column(std::string("u_ref_") + c1);
    const std::size_t s0 = t.column(std::string("u_star_") + c0), s1 = t.column(std::string("u_star_") + c1);
    std::vector<bool> out;
    for (const auto& row : t.rows) out.push_back(row[r0] != row[s0] || row[r1] != row[s1]);
    return out;
}

std::pair<const char*, const char*> input_names(ModelKind m)
{
    switch (m) {
    case ModelKind::Unicycle: return {"a", "alpha"};
    case ModelKind::Bicycle: return {"a", "beta"};
    case ModelKind::PointMass: return {"ax", "ay"};
    }
    return {"a", "alpha"};
}

}  // namespace

PlotMode parse_plot_mode(const std::string& s)
{
    if (s == "path") return PlotMode::Path;
    if (s == "hvalue") return PlotMode::HValue;
    if (s == "inputs") return PlotMode::Inputs;
    throw ValidationError("unknown plot mode '" + s + "' (expected path | hvalue | inputs)");
}

std::string render_svg(const TrajectoryTable& table, PlotMode mode)
{
    const auto [c0, c1] = input_names(table.model);
    const std::vector<bool> active = filter_active(table, c0, c1);
    const std::vector<double> t = table.series("t");
    std::ostringstream body;
    double total_height = kPanelHeight;

    if (mode == PlotMode::Path) {
        const bool pm = table.model == ModelKind::PointMass;
        const std::vector<double> xs = table.series(pm ? "px" : "x");
        const std::vector<double> ys = table.series(pm ? "py" : "y");
        Box box;
        for (std::size_t i = 0; i < xs.size(); ++i) box.add(xs[i], ys[i]);
        for (std::size_t o = 0; o < table.n_obstacles; ++o) {
            const std::string pre = "o" + std::to_string(o) + "_";
            const auto cx = table.series(pre + "cx"), cy = table.series(pre + "cy"), r = table.series(pre + "r");
            for (std::size_t i : {std::size_t{0}, cx.size() - 1}) {
                if (cx.empty()) break;
                box.add(cx[i] - r[i], cy[i] - r[i]);
                box.add(cx[i] + r[i], cy[i] + r[i]);
            }
        }
        Panel p(box, 0.0, true);
        frame(body, p, "Vehicle path", "x [m]", "y [m]");
        for (std::size_t o = 0; o < table.n_obstacles; ++o) {
            const std::string pre = "o" + std::to_string(o) + "_";
            const auto cx = table.series(pre + "cx"), cy = table.series(pre + "cy"), r = table.series(pre + "r");
            if (cx.empty()) continue;
            const bool moved = cx.front() != cx.back() || cy.front() != cy.back();
            if (moved) {
                polyline(body, p, cx, cy, 0, cx.size() - 1, "#888", 1.0, true);
                body << "<circle cx=\"" << num(p.px(cx.front())) << "\" cy=\"" << num(p.py(cy.front())) << "\" r=\""
                     << num(r.front() * p.sx) << "\" fill=\"#2ca02c\" fill-opacity=\"0.15\" stroke=\"#2ca02c\" "
                        "stroke-dasharray=\"4,3\"/>\n";
            }
            body << "<circle cx=\"" << num(p.px(cx.back())) << "\" cy=\"" << num(p.py(cy.back())) << "\" r=\""
                 << num(r.back() * p.sx) << "\" fill=\"#2ca02c\" fill-opacity=\"0.35\" stroke=\"#2ca02c\"/>\n";
        }
        flagged_series(body, p, xs, ys, active, kActiveColor, kPassiveColor, 2.0);
    } else if (mode == PlotMode::HValue) {
        const std::size_t n = std::max<std::size_t>(table.n_obstacles, 1);
        total_height = kPanelHeight * static_cast<double>(n);
        for (std::size_t o = 0; o < table.n_obstacles; ++o) {
            const std::string pre = "o" + std::to_string(o) + "_";
            const auto h = table.series(pre + "h");
            Box box;
            for (std::size_t i = 0; i < t.size(); ++i) box.add(t[i], h[i]);
            box.add(t.empty() ? 0.0 : t.front(), 0.0);
            Panel p(box, kPanelHeight * static_cast<double>(o), false);
            frame(body, p, "CBF value, obstacle " + std::to_string(o), "t [s]", "h");
            body << "<line x1=\"" << num(p.px(p.box.x0)) << "\" y1=\"" << num(p.py(0.0)) << "\" x2=\""
                 << num(p.px(p.box.x1)) << "\" y2=\"" << num(p.py(0.0)) << "\" stroke=\"#999\" stroke-dasharray=\"3,3\"/>\n";
            flagged_series(body, p, t, h, active, kHActiveColor, kPassiveColor, 1.5);
        }
        if (table.n_obstacles == 0) {
            Panel p(Box{}, 0.0, false);
            frame(body, p, "CBF value (no obstacles)", "t [s]", "h");
        }
    } else {
        total_height = 2 * kPanelHeight;
        const char* names[2] = {c0, c1};
        for (int k = 0; k < 2; ++k) {
            const auto ref = table.series(std::string("u_ref_") + names[k]);
            const auto star = table.series(std::string("u_star_") + names[k]);
            Box box;
            for (std::size_t i = 0; i < t.size(); ++i) {
                box.add(t[i], ref[i]);
                box.add(t[i], star[i]);
            }
            Panel p(box, kPanelHeight * k, false);
            frame(body, p, std::string("Input ") + names[k] + ": reference (dashed) vs filtered", "t [s]", names[k]);
            if (!t.empty()) {
                polyline(body, p, t, ref, 0, t.size() - 1, "#555", 1.2, true);
                polyline(body, p, t, star, 0, t.size() - 1, kActiveColor, 1.5);
            }
        }
    }

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << num(total_height)
        << "\" viewBox=\"0 0 " << kWidth << ' ' << num(total_height) << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return out.str();
}

}  // namespace c3bf
