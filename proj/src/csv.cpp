#include "hubreg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hubreg::csv {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: identical bytes everywhere
  if (!out) throw ConfigError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  return in;
}

void write_provenance(std::ofstream& out,
                      const std::vector<std::string>& provenance) {
  for (const auto& line : provenance) out << "# " << line << "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ConfigError(path + ": line " + std::to_string(line_no) +
                      ": cannot parse number '" + field + "'");
  return value;
}

struct CsvBody {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // with original line numbers
  std::vector<std::size_t> line_numbers;
};

CsvBody read_body(const std::string& path) {
  auto in = open_in(path);
  CsvBody body;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      body.header = std::move(fields);
      have_header = true;
      continue;
    }
    body.rows.push_back(std::move(fields));
    body.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ConfigError(path + ": missing header row");
  return body;
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& data,
                   const std::vector<std::string>& provenance) {
  data.validate();
  auto out = open_out(path);
  write_provenance(out, provenance);
  out << "y";
  for (Index j = 0; j < data.d(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]);
    for (Index j = 0; j < data.d(); ++j)
      out << ',' << format_double(data.X(i, j));
    out << "\n";
  }
}

Dataset read_dataset(const std::string& path) {
  const CsvBody body = read_body(path);
  if (body.header.empty() || body.header.front() != "y")
    throw ConfigError(path + ": header must start with 'y'");
  const std::size_t d = body.header.size() - 1;
  if (d < 1) throw ConfigError(path + ": no covariate columns");
  for (std::size_t j = 0; j < d; ++j)
    if (body.header[j + 1] != "x" + std::to_string(j + 1))
      throw ConfigError(path + ": expected column 'x" + std::to_string(j + 1) +
                        "', found '" + body.header[j + 1] + "'");
  if (body.rows.empty()) throw ConfigError(path + ": no observations");

  Dataset data;
  data.X.resize(static_cast<Index>(body.rows.size()), static_cast<Index>(d));
  data.y.resize(static_cast<Index>(body.rows.size()));
  for (std::size_t i = 0; i < body.rows.size(); ++i) {
    const auto& row = body.rows[i];
    const std::size_t line_no = body.line_numbers[i];
    if (row.size() != d + 1)
      throw ConfigError(path + ": line " + std::to_string(line_no) +
                        ": expected " + std::to_string(d + 1) +
                        " fields, got " + std::to_string(row.size()));
    data.y[static_cast<Index>(i)] = parse_double(row[0], path, line_no);
    for (std::size_t j = 0; j < d; ++j)
      data.X(static_cast<Index>(i), static_cast<Index>(j)) =
          parse_double(row[j + 1], path, line_no);
  }
  data.validate();
  return data;
}

void write_indexed_vector(const std::string& path, const Vector& v,
                          const std::vector<std::string>& provenance) {
  auto out = open_out(path);
  write_provenance(out, provenance);
  out << "index,value\n";
  for (Index i = 0; i < v.size(); ++i)
    out << i << ',' << format_double(v[i]) << "\n";
}

Vector read_indexed_vector(const std::string& path) {
  const CsvBody body = read_body(path);
  if (body.header != std::vector<std::string>{"index", "value"})
    throw ConfigError(path + ": expected header 'index,value'");
  Vector v(static_cast<Index>(body.rows.size()));
  for (std::size_t i = 0; i < body.rows.size(); ++i) {
    const auto& row = body.rows[i];
    const std::size_t line_no = body.line_numbers[i];
    if (row.size() != 2)
      throw ConfigError(path + ": line " + std::to_string(line_no) +
                        ": expected 2 fields, got " + std::to_string(row.size()));
    const double idx = parse_double(row[0], path, line_no);
    if (idx != static_cast<double>(i))
      throw ConfigError(path + ": line " + std::to_string(line_no) +
                        ": indices must be consecutive from 0");
    v[static_cast<Index>(i)] = parse_double(row[1], path, line_no);
  }
  return v;
}

void write_sweep_rows(const std::string& path, const SweepReport& report,
                      const std::vector<std::string>& provenance) {
  auto out = open_out(path);
  write_provenance(out, provenance);
  out << "estimator,n,replicate,seed,l1_error,l2_error,support_recovered,"
         "converged,lambda_o,lambda_s\n";
  for (const auto& row : report.rows) {
    out << to_string(row.estimator) << ',' << row.n << ',' << row.replicate
        << ',' << row.seed << ',' << format_double(row.l1_error) << ','
        << format_double(row.l2_error) << ',' << (row.support_recovered ? 1 : 0)
        << ',' << (row.converged ? 1 : 0) << ','
        << format_double(row.lambda_o) << ',' << format_double(row.lambda_s)
        << "\n";
  }
}

void write_sweep_plot(const std::string& path, const SweepReport& report,
                      const std::vector<std::string>& provenance) {
  auto out = open_out(path);
  write_provenance(out, provenance);
  out << "estimator,n,log_n,log_median_l2\n";
  for (const auto& agg : report.aggregates) {
    if (!(agg.median_l2 > 0.0)) continue;
    out << to_string(agg.estimator) << ',' << agg.n << ','
        << format_double(std::log(static_cast<double>(agg.n))) << ','
        << format_double(std::log(agg.median_l2)) << "\n";
  }
}

void write_sweep_svg(const std::string& path, const SweepReport& report) {
  // Log-log medians mapped into a fixed 640x480 viewport.
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::vector<std::pair<double, double>> pts[2];
  for (const auto& agg : report.aggregates) {
    if (!(agg.median_l2 > 0.0)) continue;
    const double x = std::log(static_cast<double>(agg.n));
    const double y = std::log(agg.median_l2);
    pts[agg.estimator == EstimatorKind::huber_l1 ? 0 : 1].emplace_back(x, y);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  auto out = open_out(path);
  constexpr double W = 640, H = 480, pad = 50;
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;
  const double yspan = ymax > ymin ? ymax - ymin : 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const char* colors[2] = {"#d62728", "#1f77b4"};
  const char* names[2] = {"huber_l1", "lasso"};
  for (int e = 0; e < 2; ++e) {
    if (pts[e].empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << colors[e]
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts[e]) {
      const double px = pad + (x - xmin) / xspan * (W - 2 * pad);
      const double py = H - pad - (y - ymin) / yspan * (H - 2 * pad);
      out << format_double(px) << ',' << format_double(py) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << (pad + 10) << "\" y=\"" << (pad + 20 * (e + 1))
        << "\" fill=\"" << colors[e] << "\">" << names[e] << "</text>\n";
  }
  out << "<text x=\"" << (W / 2 - 60) << "\" y=\"" << (H - 10)
      << "\">log n vs log median l2 error</text>\n</svg>\n";
}

void write_probe_rows(const std::string& path, const ProbeReport& report,
                      const std::vector<std::string>& provenance) {
  auto out = open_out(path);
  write_provenance(out, provenance);
  if (report.kind == ProbeKind::multiplier) {
    out << "n,replicate,value\n";
    for (const auto& rec : report.records)
      out << rec.n << ',' << rec.index << ',' << format_double(rec.value)
          << "\n";
  } else {
    out << "n,sample,lhs,v_norm2_sq,margin\n";
    for (const auto& rec : report.records)
      out << rec.n << ',' << rec.index << ',' << format_double(rec.value)
          << ',' << format_double(rec.v_norm2_sq) << ','
          << format_double(rec.margin) << "\n";
  }
}

}  // namespace hubreg::csv
