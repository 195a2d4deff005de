// SPDX-License-Identifier: Apache-2.0
//
// reccal - reciprocity calibration of dual-antenna repeaters
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "reccal/harness.hpp"

namespace reccal {

const char* const kCsvHeader = "snr_db,m_a,m_b,algorithm,n_iter,trials,rmse,mean_runtime_us,seed";

namespace {

// Shortest form that reads back to the same double.
std::string format_double(double x)
{
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(const std::string& s)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0')
        throw IoError("csv: bad number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw IoError("csv: bad integer '" + s + "'");
    }
    if (used != s.size())
        throw IoError("csv: bad integer '" + s + "'");
    return v;
}

std::string xml_escape(const std::string& s)
{
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

std::string fixed(double v, int digits = 2)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os)
{
    os << kCsvHeader << '\n';
    for (const ResultRow& r : rows) {
        os << format_double(r.snr_db) << ',' << r.m_a << ',' << r.m_b << ',' << r.algorithm << ',' << r.n_iter
           << ',' << r.trials << ',' << format_double(r.rmse) << ',' << format_double(r.mean_runtime_us) << ','
           << r.seed << '\n';
    }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path)
{
    if (rows.empty())
        throw DomainError("emit_csv: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    write_csv(rows, out);
    out.flush();
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

std::vector<ResultRow> parse_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw IoError("csv: missing or unexpected header");
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 9)
            throw IoError("csv: expected 9 fields, got " + std::to_string(f.size()));
        ResultRow r;
        r.snr_db = parse_double(f[0]);
        r.m_a = static_cast<int>(parse_int(f[1]));
        r.m_b = static_cast<int>(parse_int(f[2]));
        r.algorithm = f[3];
        r.n_iter = static_cast<int>(parse_int(f[4]));
        r.trials = static_cast<int>(parse_int(f[5]));
        r.rmse = parse_double(f[6]);
        r.mean_runtime_us = parse_double(f[7]);
        try {
            std::size_t used = 0;
            r.seed = std::stoull(f[8], &used);
            if (used != f[8].size())
                throw IoError("csv: bad seed");
        } catch (const std::logic_error&) {
            throw IoError("csv: bad seed '" + f[8] + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_svg(const std::vector<ResultRow>& rows, const PlotAxes& axes)
{
    if (rows.empty())
        throw DomainError("render_svg: no rows");

    std::set<double> snrs;
    for (const ResultRow& r : rows)
        snrs.insert(r.snr_db);
    const bool tag_snr = axes.x_is_iterations && snrs.size() > 1;

    // Series in first-appearance order, points sorted by x.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double ymin = HUGE_VAL, ymax = -HUGE_VAL, xmin = HUGE_VAL, xmax = -HUGE_VAL;
    for (const ResultRow& r : rows) {
        if (!(r.rmse > 0.0) || !std::isfinite(r.rmse))
            continue;  // not representable on a log axis
        std::string key = r.algorithm;
        if (tag_snr)
            key += " @ " + format_double(r.snr_db) + " dB";
        const double x = axes.x_is_iterations ? r.n_iter : r.snr_db;
        if (!series.count(key))
            order.push_back(key);
        series[key].emplace_back(x, r.rmse);
        ymin = std::min(ymin, r.rmse);
        ymax = std::max(ymax, r.rmse);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }

    const double width = 720, height = 480;
    const double left = 80, right = 170, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!axes.title.empty())
        svg << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
            << xml_escape(axes.title) << "</text>\n";

    if (order.empty()) {
        svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
            << "\" text-anchor=\"middle\">no positive RMSE values</text>\n</svg>\n";
        return svg.str();
    }

    int dlo = static_cast<int>(std::floor(std::log10(ymin)));
    int dhi = static_cast<int>(std::ceil(std::log10(ymax)));
    if (dhi <= dlo)
        dhi = dlo + 1;
    const bool log_x = axes.x_is_iterations && xmin > 0.0 && xmax / xmin >= 20.0;
    const auto tx = [&](double x) {
        if (xmax == xmin)
            return left + pw / 2;
        if (log_x)
            return left + pw * (std::log10(x) - std::log10(xmin)) / (std::log10(xmax) - std::log10(xmin));
        return left + pw * (x - xmin) / (xmax - xmin);
    };
    const auto ty = [&](double y) { return top + ph * (dhi - std::log10(y)) / (dhi - dlo); };

    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int d = dlo; d <= dhi; ++d) {
        const double y = top + ph * (dhi - d) / (dhi - dlo);
        svg << "<line x1=\"" << left << "\" y1=\"" << fixed(y) << "\" x2=\"" << left + pw << "\" y2=\"" << fixed(y)
            << "\" stroke=\"#ddd\"/>\n"
            << "<text class=\"ytick\" x=\"" << left - 6 << "\" y=\"" << fixed(y + 4)
            << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }

    std::set<double> xs;
    for (const auto& [key, pts] : series)
        for (const auto& p : pts)
            xs.insert(p.first);
    std::vector<double> xticks(xs.begin(), xs.end());
    if (xticks.size() > 12) {
        std::vector<double> thin;
        const std::size_t step = (xticks.size() + 11) / 12;
        for (std::size_t i = 0; i < xticks.size(); i += step)
            thin.push_back(xticks[i]);
        xticks = thin;
    }
    for (double x : xticks) {
        const double px = tx(x);
        svg << "<line x1=\"" << fixed(px) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(px) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text class=\"xtick\" x=\"" << fixed(px) << "\" y=\"" << top + ph + 18
            << "\" text-anchor=\"middle\">" << format_double(x) << "</text>\n";
    }

    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
        << xml_escape(axes.x_label) << "</text>\n"
        << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << top + ph / 2 << ")\">" << xml_escape(axes.y_label) << "</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    for (std::size_t s = 0; s < order.size(); ++s) {
        auto pts = series[order[s]];
        std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        const char* color = palette[s % (sizeof palette / sizeof palette[0])];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            svg << (i ? " " : "") << fixed(tx(pts[i].first)) << ',' << fixed(ty(pts[i].second));
        svg << "\"/>\n";
        for (const auto& p : pts)
            svg << "<circle cx=\"" << fixed(tx(p.first)) << "\" cy=\"" << fixed(ty(p.second))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = top + 16 + 20.0 * s;
        svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 36
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly << "\">" << xml_escape(order[s]) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_svg_plot(const std::vector<ResultRow>& rows, const std::string& path, const PlotAxes& axes)
{
    const std::string body = render_svg(rows, axes);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << body;
    out.flush();
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

}  // namespace reccal
