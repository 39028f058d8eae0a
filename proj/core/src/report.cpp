#include "itc/report.hpp"

#include "itc/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace itc {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    thread_local std::mt19937_64 rng{std::random_device{}()};
    auto tmp = path;
    tmp += ".tmp" + std::to_string(rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) return std::to_string(value);
    return std::string(buf, end);
}

std::string points_csv(const std::vector<ParetoPoint>& points) {
    std::string out = "label,compute,accuracy,n_queries\n";
    for (const auto& p : points) {
        out += csv_field(p.label) + ',' + format_number(p.compute) + ',' + format_number(p.accuracy) + ',' +
               std::to_string(p.n_queries) + '\n';
    }
    return out;
}

namespace {

std::string escape_xml(std::string_view text) {
    std::string out;
    for (char c : text) {
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

std::string fixed(double v, int precision = 1) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(precision);
    s << v;
    return s.str();
}

constexpr double width = 720, height = 480, left = 70, right = 30, top = 50, bottom = 70;

std::string header(std::string_view title) {
    std::ostringstream s;
    s << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")" << height
      << R"(" font-family="sans-serif" font-size="12">)" << '\n'
      << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n'
      << R"(<text x=")" << width / 2 << R"(" y="28" text-anchor="middle" font-size="16">)" << escape_xml(title)
      << "</text>\n";
    return s.str();
}

} // namespace

std::string pareto_svg(const std::vector<ParetoPoint>& points, const std::vector<ParetoPoint>& front,
                       std::string_view title) {
    double max_compute = 1.0;
    for (const auto& p : points) max_compute = std::max(max_compute, p.compute);
    max_compute *= 1.05;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto sx = [&](double c) { return left + c / max_compute * plot_w; };
    auto sy = [&](double a) { return top + (1.0 - a) * plot_h; };

    std::ostringstream s;
    s << header(title);
    s << R"(<line x1=")" << left << R"(" y1=")" << top + plot_h << R"(" x2=")" << left + plot_w << R"(" y2=")"
      << top + plot_h << R"(" stroke="black"/>)" << '\n';
    s << R"(<line x1=")" << left << R"(" y1=")" << top << R"(" x2=")" << left << R"(" y2=")" << top + plot_h
      << R"(" stroke="black"/>)" << '\n';
    for (int i = 0; i <= 5; ++i) {
        double a = i / 5.0, c = max_compute * i / 5.0;
        s << R"(<text x=")" << left - 8 << R"(" y=")" << fixed(sy(a) + 4) << R"(" text-anchor="end">)" << fixed(a, 1)
          << "</text>\n";
        s << R"(<text x=")" << fixed(sx(c)) << R"(" y=")" << top + plot_h + 18 << R"(" text-anchor="middle">)"
          << fixed(c, 0) << "</text>\n";
    }
    s << R"(<text x=")" << left + plot_w / 2 << R"(" y=")" << height - 20
      << R"(" text-anchor="middle">mean completion tokens per query</text>)" << '\n';
    s << R"(<text x="18" y=")" << top + plot_h / 2 << R"(" text-anchor="middle" transform="rotate(-90 18 )"
      << top + plot_h / 2 << R"lit()">accuracy</text>)lit" << '\n';

    if (!front.empty()) {
        s << R"(<polyline fill="none" stroke="#d62728" stroke-width="2" points=")";
        for (std::size_t i = 0; i < front.size(); ++i) {
            if (i > 0) s << fixed(sx(front[i].compute)) << ',' << fixed(sy(front[i - 1].accuracy)) << ' ';
            s << fixed(sx(front[i].compute)) << ',' << fixed(sy(front[i].accuracy)) << ' ';
        }
        s << "\"/>\n";
    }
    for (const auto& p : points) {
        bool on_front = std::find(front.begin(), front.end(), p) != front.end();
        s << R"(<circle cx=")" << fixed(sx(p.compute)) << R"(" cy=")" << fixed(sy(p.accuracy)) << R"(" r="4" fill=")"
          << (on_front ? "#d62728" : "#1f77b4") << R"("><title>)" << escape_xml(p.label) << " ("
          << format_number(p.compute) << ", " << format_number(p.accuracy) << ")</title></circle>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string bar_chart_svg(std::string_view title, std::string_view y_label, const std::vector<Bar>& bars) {
    double lo = 0.0, hi = 0.0;
    for (const auto& b : bars) {
        lo = std::min(lo, b.value);
        hi = std::max(hi, b.value);
    }
    if (hi == lo) hi = lo + 1.0;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto sy = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };
    const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());

    std::ostringstream s;
    s << header(title);
    s << R"(<line x1=")" << left << R"(" y1=")" << fixed(sy(0)) << R"(" x2=")" << left + plot_w << R"(" y2=")"
      << fixed(sy(0)) << R"(" stroke="black"/>)" << '\n';
    s << R"(<text x="18" y=")" << top + plot_h / 2 << R"(" text-anchor="middle" transform="rotate(-90 18 )"
      << top + plot_h / 2 << R"lit()">)lit" << escape_xml(y_label) << "</text>\n";
    s << R"(<text x=")" << left - 8 << R"(" y=")" << fixed(sy(hi) + 4) << R"(" text-anchor="end">)"
      << format_number(hi) << "</text>\n";
    s << R"(<text x=")" << left - 8 << R"(" y=")" << fixed(sy(lo) + 4) << R"(" text-anchor="end">)"
      << format_number(lo) << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        double x = left + slot * static_cast<double>(i) + slot * 0.15;
        double y0 = sy(0), y1 = sy(bars[i].value);
        s << R"(<rect x=")" << fixed(x) << R"(" y=")" << fixed(std::min(y0, y1)) << R"(" width=")"
          << fixed(slot * 0.7) << R"(" height=")" << fixed(std::abs(y1 - y0)) << R"(" fill="#1f77b4"><title>)"
          << escape_xml(bars[i].label) << ": " << format_number(bars[i].value) << "</title></rect>\n";
        s << R"(<text x=")" << fixed(x + slot * 0.35) << R"(" y=")" << top + plot_h + 18
          << R"(" text-anchor="middle">)" << escape_xml(bars[i].label) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

} // namespace itc
