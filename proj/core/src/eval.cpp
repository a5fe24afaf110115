#include "fringe/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "fringe/errors.hpp"
#include "fringe/numio.hpp"

namespace fringe {

double rms_error(const std::vector<std::pair<double, double>>& true_predicted_nm) {
  if (true_predicted_nm.empty())
    throw validation_error("rms_error: empty input");
  double sum = 0.0;
  for (const auto& [truth, predicted] : true_predicted_nm) {
    const double d = predicted - truth;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(true_predicted_nm.size()));
}

void recompute_rms(EvalReport& report, const ThicknessGrid& grid) {
  std::vector<std::pair<double, double>> argmax_pairs, expect_pairs, ongrid_pairs;
  argmax_pairs.reserve(report.records.size());
  expect_pairs.reserve(report.records.size());
  for (const EvalRecord& r : report.records) {
    argmax_pairs.emplace_back(r.catalogue_nm, r.ann_argmax_nm);
    expect_pairs.emplace_back(r.catalogue_nm, r.ann_expect_nm);
    if (grid.index_of(r.catalogue_nm) >= 0)
      ongrid_pairs.emplace_back(r.catalogue_nm, r.ann_argmax_nm);
  }
  report.rms_argmax = rms_error(argmax_pairs);
  report.rms_expect = rms_error(expect_pairs);
  if (ongrid_pairs.empty())
    report.rms_ongrid_argmax.reset();
  else
    report.rms_ongrid_argmax = rms_error(ongrid_pairs);
}

EvalReport evaluate(const MlpNetwork& net, const Dataset& test_set,
                    const ThicknessGrid& grid) {
  grid.validate();
  if (net.input_size() != kFeatureCount)
    throw validation_error("evaluate: network takes " + std::to_string(net.input_size()) +
                           " inputs, features have " + std::to_string(kFeatureCount));
  if (net.output_size() != grid.count)
    throw validation_error("evaluate: network has " + std::to_string(net.output_size()) +
                           " outputs, grid has " + std::to_string(grid.count) + " classes");
  if (test_set.records.empty())
    throw validation_error("evaluate: empty test set");

  EvalReport report;
  if (test_set.provenance.noisy)
    report.detector = DetectorModel::from_bit_depth(test_set.provenance.bit_depth);
  report.records.reserve(test_set.records.size());
  for (const DatasetRecord& rec : test_set.records) {
    const std::vector<double> out = net.forward(rec.features);
    EvalRecord er;
    er.catalogue_nm = rec.thickness_nm;
    er.ann_argmax_nm = decode_argmax(out, grid);
    er.ann_expect_nm = decode_expectation(out, grid);
    report.records.push_back(er);
  }
  recompute_rms(report, grid);
  return report;
}

namespace {

constexpr std::string_view kReportHeader = "catalogue_nm,ann_argmax_nm,ann_expect_nm";

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::size_t field_column(std::string_view line, std::string_view field) {
  return static_cast<std::size_t>(field.data() - line.data()) + 1;
}

}  // namespace

void save_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  if (report.records.empty())
    throw validation_error("report: refusing to write an empty report");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << kReportHeader << "\n";
  for (const EvalRecord& r : report.records)
    out << format_double(r.catalogue_nm) << "," << format_double(r.ann_argmax_nm) << ","
        << format_double(r.ann_expect_nm) << "\n";
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

EvalReport load_report_csv(const std::filesystem::path& path, const ThicknessGrid& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");

  std::string line;
  if (!std::getline(in, line))
    throw parse_error("report '" + path.string() + "': missing header", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader)
    throw parse_error("report '" + path.string() + "': header mismatch, expected '" +
                          std::string(kReportHeader) + "'",
                      1, 1);

  EvalReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw parse_error("report '" + path.string() + "': expected 3 fields, got " +
                            std::to_string(fields.size()),
                        line_no, 1);
    double values[3];
    for (int j = 0; j < 3; ++j) {
      const auto v = try_parse_double(fields[static_cast<std::size_t>(j)]);
      if (!v)
        throw parse_error("report '" + path.string() + "': bad value '" +
                              std::string(fields[static_cast<std::size_t>(j)]) + "'",
                          line_no, field_column(line, fields[static_cast<std::size_t>(j)]));
      values[j] = *v;
    }
    report.records.push_back({values[0], values[1], values[2]});
  }
  if (report.records.empty())
    throw parse_error("report '" + path.string() + "': no records", line_no, 1);
  recompute_rms(report, grid);
  return report;
}

namespace {

// Plot geometry: data range 0..210nm mapped onto a square frame.
constexpr double kDataMax = 210.0;
constexpr double kFrameLeft = 80.0;
constexpr double kFrameTop = 40.0;
constexpr double kFrameSize = 520.0;

double map_x(double nm) { return kFrameLeft + nm / kDataMax * kFrameSize; }
double map_y(double nm) { return kFrameTop + kFrameSize - nm / kDataMax * kFrameSize; }

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_scatter_svg(const EvalReport& report, const std::filesystem::path& path) {
  if (report.records.empty())
    throw validation_error("scatter: refusing to plot an empty report");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
         "viewBox=\"0 0 640 640\">\n";
  out << "  <title>Catalogue vs ANN thickness</title>\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"#ffffff\"/>\n";

  // Grid lines and tick labels every 50nm.
  for (int t = 0; t <= 200; t += 50) {
    const std::string gx = px(map_x(t));
    const std::string gy = px(map_y(t));
    out << "  <line x1=\"" << gx << "\" y1=\"" << px(kFrameTop) << "\" x2=\"" << gx
        << "\" y2=\"" << px(kFrameTop + kFrameSize) << "\" stroke=\"#dddddd\"/>\n";
    out << "  <line x1=\"" << px(kFrameLeft) << "\" y1=\"" << gy << "\" x2=\""
        << px(kFrameLeft + kFrameSize) << "\" y2=\"" << gy << "\" stroke=\"#dddddd\"/>\n";
    out << "  <text x=\"" << gx << "\" y=\"" << px(kFrameTop + kFrameSize + 22)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << t
        << "</text>\n";
    out << "  <text x=\"" << px(kFrameLeft - 10) << "\" y=\"" << px(map_y(t) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"end\">" << t
        << "</text>\n";
  }

  out << "  <rect x=\"" << px(kFrameLeft) << "\" y=\"" << px(kFrameTop) << "\" width=\""
      << px(kFrameSize) << "\" height=\"" << px(kFrameSize)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  out << "  <line class=\"identity\" x1=\"" << px(map_x(0)) << "\" y1=\"" << px(map_y(0))
      << "\" x2=\"" << px(map_x(kDataMax)) << "\" y2=\"" << px(map_y(kDataMax))
      << "\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n";

  out << "  <g class=\"series-argmax\" fill=\"#1f77b4\" fill-opacity=\"0.75\">\n";
  for (const EvalRecord& r : report.records) {
    out << "    <circle class=\"marker argmax\" cx=\"" << px(map_x(r.catalogue_nm))
        << "\" cy=\"" << px(map_y(r.ann_argmax_nm)) << "\" r=\"4\" data-catalogue-nm=\""
        << format_double(r.catalogue_nm) << "\" data-ann-nm=\""
        << format_double(r.ann_argmax_nm) << "\"/>\n";
  }
  out << "  </g>\n";

  out << "  <g class=\"series-expect\" fill=\"none\" stroke=\"#d62728\" "
         "stroke-width=\"1.5\">\n";
  for (const EvalRecord& r : report.records) {
    const double cx = map_x(r.catalogue_nm);
    const double cy = map_y(r.ann_expect_nm);
    out << "    <rect class=\"marker expect\" x=\"" << px(cx - 3.4) << "\" y=\""
        << px(cy - 3.4) << "\" width=\"6.8\" height=\"6.8\" transform=\"rotate(45 "
        << px(cx) << " " << px(cy) << ")\" data-catalogue-nm=\""
        << format_double(r.catalogue_nm) << "\" data-ann-nm=\""
        << format_double(r.ann_expect_nm) << "\"/>\n";
  }
  out << "  </g>\n";

  // Legend.
  out << "  <circle cx=\"" << px(kFrameLeft + 18) << "\" cy=\"" << px(kFrameTop + 20)
      << "\" r=\"4\" fill=\"#1f77b4\" fill-opacity=\"0.75\"/>\n";
  out << "  <text x=\"" << px(kFrameLeft + 30) << "\" y=\"" << px(kFrameTop + 24)
      << "\" font-family=\"sans-serif\" font-size=\"13\">argmax</text>\n";
  out << "  <rect x=\"" << px(kFrameLeft + 14.6) << "\" y=\"" << px(kFrameTop + 36.6)
      << "\" width=\"6.8\" height=\"6.8\" transform=\"rotate(45 " << px(kFrameLeft + 18)
      << " " << px(kFrameTop + 40) << ")\" fill=\"none\" stroke=\"#d62728\" "
         "stroke-width=\"1.5\"/>\n";
  out << "  <text x=\"" << px(kFrameLeft + 30) << "\" y=\"" << px(kFrameTop + 44)
      << "\" font-family=\"sans-serif\" font-size=\"13\">expectation</text>\n";

  if (report.detector) {
    out << "  <text class=\"noise-annotation\" x=\"" << px(kFrameLeft + kFrameSize - 10)
        << "\" y=\"" << px(kFrameTop + 24)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"end\">"
        << "\xCF\x83_noise = " << format_double(snr(*report.detector), 4) << " ("
        << report.detector->bit_depth << "-bit)</text>\n";
  }

  out << "  <text x=\"" << px(kFrameLeft + kFrameSize / 2) << "\" y=\"610\" "
         "font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">"
         "Catalogue thickness (nm)</text>\n";
  out << "  <text x=\"24\" y=\"" << px(kFrameTop + kFrameSize / 2)
      << "\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 24 "
      << px(kFrameTop + kFrameSize / 2) << ")\">ANN estimate (nm)</text>\n";
  out << "</svg>\n";

  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

void emit_scatter(const EvalReport& report, const std::filesystem::path& stem) {
  if (report.records.empty())
    throw validation_error("scatter: refusing to plot an empty report");
  std::filesystem::path csv = stem;
  csv += ".csv";
  std::filesystem::path svg = stem;
  svg += ".svg";
  save_report_csv(report, csv);
  write_scatter_svg(report, svg);
}

}  // namespace fringe
