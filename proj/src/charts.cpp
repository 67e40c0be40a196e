#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "asnsim/agreement.hpp"

// Minimal SVG bar charts: per recruitment field, four agreement bars
// (overall, A, B, C) for each level.

namespace asnsim {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 48.0;
constexpr double kMarginBottom = 64.0;

const char* kFillFP = "#4878a8";
const char* kFillAP = "#90b860";

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace

void write_agreement_chart(const std::filesystem::path& path, const std::string& title,
                           const AgreementReportRow* fp, const AgreementReportRow* ap) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write chart: " + path.string());

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto y_of = [&](double pct) { return kMarginTop + plot_h * (1.0 - pct / 100.0); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<style>text{font-family:sans-serif;font-size:12px;}</style>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // Gridlines and y-axis labels every 20 points.
    for (int pct = 0; pct <= 100; pct += 20) {
        const double y = y_of(pct);
        out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << y << "\" x2=\""
            << kWidth - kMarginRight << "\" y2=\"" << y
            << "\" stroke=\"#d8d8d8\" stroke-width=\"1\"/>\n"
            << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\">" << pct << "%</text>\n";
    }

    static constexpr const char* kMetricNames[4] = {"overall", "A", "B", "C"};
    const auto cell_of = [](const AgreementReportRow& row, int metric) -> const AgreementCell& {
        switch (metric) {
            case 0:
                return row.overall;
            case 1:
                return row.a;
            case 2:
                return row.b;
            default:
                return row.c;
        }
    };

    const double group_w = plot_w / 4.0;
    const double bar_w = group_w / 3.0;
    for (int metric = 0; metric < 4; ++metric) {
        const double gx = kMarginLeft + metric * group_w;
        out << "<text x=\"" << gx + group_w / 2 << "\" y=\"" << kHeight - kMarginBottom + 20
            << "\" text-anchor=\"middle\">" << kMetricNames[metric] << "</text>\n";
        const AgreementReportRow* rows[2] = {fp, ap};
        const char* fills[2] = {kFillFP, kFillAP};
        for (int side = 0; side < 2; ++side) {
            if (rows[side] == nullptr) continue;
            const AgreementCell& cell = cell_of(*rows[side], metric);
            if (cell.n == 0) continue;
            const double pct = cell.pct();
            const double x = gx + group_w / 2 + (side == 0 ? -bar_w : 0.0);
            out << "<rect x=\"" << x << "\" y=\"" << y_of(pct) << "\" width=\"" << bar_w - 4
                << "\" height=\"" << y_of(0) - y_of(pct) << "\" fill=\"" << fills[side]
                << "\"/>\n"
                << "<text x=\"" << x + (bar_w - 4) / 2 << "\" y=\"" << y_of(pct) - 4
                << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt1(pct) << "</text>\n";
        }
    }

    // Legend.
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kHeight - 28
        << "\" width=\"12\" height=\"12\" fill=\"" << kFillFP << "\"/>\n"
        << "<text x=\"" << kMarginLeft + 18 << "\" y=\"" << kHeight - 18 << "\">FP (level 1)"
        << (fp != nullptr ? ", n=" + std::to_string(fp->n) : "") << "</text>\n"
        << "<rect x=\"" << kMarginLeft + 160 << "\" y=\"" << kHeight - 28
        << "\" width=\"12\" height=\"12\" fill=\"" << kFillAP << "\"/>\n"
        << "<text x=\"" << kMarginLeft + 178 << "\" y=\"" << kHeight - 18 << "\">AP (level 2)"
        << (ap != nullptr ? ", n=" + std::to_string(ap->n) : "") << "</text>\n"
        << "</svg>\n";
}

}  // namespace asnsim
