/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <charconv>
#include <map>
#include <string_view>

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/report.hpp>

namespace shardprof::report {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 480;
constexpr double kLeft = 80;
constexpr double kRight = 30;
constexpr double kTop = 40;
constexpr double kBottom = 60;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto const comma = line.find(',', pos);
        out.emplace_back(line.substr(pos, comma - pos));
        if (comma == std::string_view::npos) {
            return out;
        }
        pos = comma + 1;
    }
}

Table parse_csv(std::string_view text) {
    Table t;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto const line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            fail(
                ErrorKind::MalformedCsv,
                fmt::format("line {} has {} fields, expected {}", line_no, fields.size(), t.header.size())
            );
        }
        t.rows.push_back(std::move(fields));
    }
    SHARDPROF_EXPECTS(!t.header.empty(), ErrorKind::MalformedCsv, "missing header");
    return t;
}

double number(std::string const& field) {
    double v = 0.0;
    auto const* end = field.data() + field.size();
    auto const [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        fail(ErrorKind::MalformedCsv, fmt::format("'{}' is not a number", field));
    }
    return v;
}

void expect_header(Table const& t, std::vector<std::string> const& want, bool prefix = false) {
    bool const ok = prefix ? t.header.size() >= want.size()
                                 && std::equal(want.begin(), want.end(), t.header.begin())
                           : t.header == want;
    if (!ok) {
        fail(ErrorKind::MalformedCsv, fmt::format("unexpected header '{}'", fmt::join(t.header, ",")));
    }
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

constexpr std::array<char const*, 8> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"
};

class Canvas {
  public:
    explicit Canvas(std::string_view title) {
        out_ = fmt::format(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
            "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
            "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
            kWidth,
            kHeight
        );
        text(kWidth / 2, kTop / 2 + 4, title, "middle", 14);
    }

    void line(double x1, double y1, double x2, double y2, std::string_view stroke = "black") {
        out_ += fmt::format(
            "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n",
            x1,
            y1,
            x2,
            y2,
            stroke
        );
    }

    void text(double x, double y, std::string_view s, std::string_view anchor = "start", int size = 12) {
        out_ += fmt::format(
            "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n",
            x,
            y,
            anchor,
            size,
            escape(s)
        );
    }

    void polyline(std::vector<std::pair<double, double>> const& pts, std::string_view stroke) {
        std::string coords;
        for (auto const& [x, y] : pts) {
            if (!coords.empty()) {
                coords += ' ';
            }
            coords += fmt::format("{:.2f},{:.2f}", x, y);
        }
        out_ += fmt::format(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", coords, stroke
        );
    }

    void rect(double x, double y, double w, double h, std::string_view fill) {
        out_ += fmt::format(
            "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
            x,
            y,
            w,
            h,
            fill
        );
    }

    void frame(std::string_view xlabel, std::string_view ylabel) {
        line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom);
        line(kLeft, kTop, kLeft, kHeight - kBottom);
        text((kLeft + kWidth - kRight) / 2, kHeight - 15, xlabel, "middle");
        out_ += fmt::format(
            "<text x=\"15\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.2f})\">{}</text>\n",
            kHeight / 2,
            kHeight / 2,
            escape(ylabel)
        );
    }

    void no_data() {
        text(kWidth / 2, kHeight / 2, "no data", "middle", 16);
    }

    std::string finish() && {
        out_ += "</svg>\n";
        return std::move(out_);
    }

  private:
    std::string out_;
};

struct Scale {
    double lo{0};
    double hi{1};

    void fit(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    [[nodiscard]] double unit(double v) const {
        return hi > lo ? (v - lo) / (hi - lo) : 0.5;
    }
};

double px_x(double u) {
    return kLeft + u * (kWidth - kLeft - kRight);
}
double px_y(double u) {
    return kHeight - kBottom - u * (kHeight - kTop - kBottom);
}

std::string timeseries(Table const& t) {
    expect_header(t, {"trace_label", "elapsed_s", "stall_total_ns", "stall_std_ns"});
    Canvas c{"Memory stall per interval"};
    c.frame("elapsed (s)", "stall total (ns)");
    if (t.rows.empty()) {
        c.no_data();
        return std::move(c).finish();
    }
    std::map<double, std::vector<std::pair<double, double>>> series;
    std::vector<double> order;
    Scale xs{0, 0};
    Scale ys{0, 0};
    for (auto const& r : t.rows) {
        auto const label = number(r[0]);
        auto const x = number(r[1]);
        auto const y = number(r[2]);
        number(r[3]);
        if (!series.contains(label)) {
            order.push_back(label);
        }
        series[label].emplace_back(x, y);
        xs.fit(x);
        ys.fit(y);
    }
    c.text(kLeft - 5, px_y(1) + 4, format_number(ys.hi), "end");
    c.text(kLeft - 5, px_y(0) + 4, format_number(ys.lo), "end");
    c.text(px_x(0), kHeight - kBottom + 16, format_number(xs.lo), "middle");
    c.text(px_x(1), kHeight - kBottom + 16, format_number(xs.hi), "middle");
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto const colour = kPalette[i % kPalette.size()];
        std::vector<std::pair<double, double>> pts;
        for (auto const& [x, y] : series[order[i]]) {
            pts.emplace_back(px_x(xs.unit(x)), px_y(ys.unit(y)));
        }
        c.polyline(pts, colour);
        c.text(kWidth - kRight - 5, kTop + 14 * static_cast<double>(i + 1), fmt::format("trace {}", order[i]), "end");
    }
    return std::move(c).finish();
}

std::string parcoords(Table const& t) {
    expect_header(
        t,
        {"interval_start_s",
         "stall_total_ns",
         "kernel_count",
         "htod_count",
         "dtoh_count",
         "dtod_count",
         "htod_bytes",
         "dtoh_bytes",
         "dtod_bytes",
         "stall_std_ns"}
    );
    constexpr std::size_t kAxes = 9;
    Canvas c{"Top-variability intervals"};
    std::vector<Scale> scales(kAxes, Scale{0, 0});
    std::vector<std::vector<double>> values;
    for (auto const& r : t.rows) {
        number(r[0]);
        std::vector<double> v;
        for (std::size_t a = 0; a < kAxes; ++a) {
            v.push_back(number(r[a + 1]));
            scales[a].fit(v.back());
        }
        values.push_back(std::move(v));
    }
    for (std::size_t a = 0; a < kAxes; ++a) {
        auto const x = px_x(static_cast<double>(a) / (kAxes - 1));
        c.line(x, px_y(0), x, px_y(1));
        c.text(x, kHeight - kBottom + 16, t.header[a + 1], "middle", 10);
        c.text(x, px_y(1) - 4, format_number(scales[a].hi), "middle", 9);
    }
    if (values.empty()) {
        c.no_data();
        return std::move(c).finish();
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t a = 0; a < kAxes; ++a) {
            pts.emplace_back(
                px_x(static_cast<double>(a) / (kAxes - 1)), px_y(scales[a].unit(values[i][a]))
            );
        }
        c.polyline(pts, kPalette[i % kPalette.size()]);
    }
    return std::move(c).finish();
}

std::string overhead_bars(Table const& t) {
    expect_header(t, {"phase", "world_size", "max_wall_s"}, true);
    Canvas c{"Pipeline overhead"};
    c.frame("phase / world size", "max wall time (s)");
    if (t.rows.empty()) {
        c.no_data();
        return std::move(c).finish();
    }
    Scale ys{0, 0};
    for (auto const& r : t.rows) {
        if (r[0] != "generation" && r[0] != "aggregation") {
            fail(ErrorKind::MalformedCsv, fmt::format("unknown phase '{}'", r[0]));
        }
        number(r[1]);
        ys.fit(number(r[2]));
        for (std::size_t i = 3; i < r.size(); ++i) {
            if (!r[i].empty()) {
                number(r[i]);
            }
        }
    }
    auto const slot = (kWidth - kLeft - kRight) / static_cast<double>(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        auto const& r = t.rows[i];
        auto const top = px_y(ys.unit(number(r[2])));
        auto const x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
        c.rect(x, top, slot * 0.7, px_y(0) - top, r[0] == "generation" ? kPalette[0] : kPalette[1]);
        c.text(x + slot * 0.35, kHeight - kBottom + 16, fmt::format("{} P={}", r[0], r[1]), "middle", 10);
        c.text(x + slot * 0.35, top - 4, r[2], "middle", 10);
    }
    return std::move(c).finish();
}

}  // namespace

std::string render_svg_text(std::string const& csv, PlotKind kind) {
    auto const table = parse_csv(csv);
    switch (kind) {
    case PlotKind::Timeseries:
        return timeseries(table);
    case PlotKind::Parcoords:
        return parcoords(table);
    case PlotKind::OverheadBars:
        return overhead_bars(table);
    }
    fail(ErrorKind::InvalidArgument, "unknown plot kind");
}

}  // namespace shardprof::report
