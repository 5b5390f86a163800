#include "fembem/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace fembem {

namespace {

using Field = std::variant<std::string RunRecord::*, double RunRecord::*, int RunRecord::*,
                           std::uint64_t RunRecord::*>;

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"experiment", &RunRecord::experiment},
      {"formulation", &RunRecord::formulation},
      {"geometry", &RunRecord::geometry},
      {"coefficients", &RunRecord::coefficients},
      {"realization", &RunRecord::realization},
      {"k", &RunRecord::k},
      {"level", &RunRecord::level},
      {"p", &RunRecord::p},
      {"n0", &RunRecord::n0},
      {"pen_a", &RunRecord::pen_a},
      {"pen_b", &RunRecord::pen_b},
      {"pen_d", &RunRecord::pen_d},
      {"seed", &RunRecord::seed},
      {"h", &RunRecord::h},
      {"kh_over_p", &RunRecord::khp},
      {"ndof_u", &RunRecord::ndof_u},
      {"ndof_m", &RunRecord::ndof_m},
      {"ndof_ext", &RunRecord::ndof_ext},
      {"residual", &RunRecord::residual},
      {"valid", &RunRecord::valid},
      {"error", &RunRecord::error},
      {"error_vol", &RunRecord::error_vol},
      {"error_m", &RunRecord::error_m},
      {"error_ext", &RunRecord::error_ext},
      {"best", &RunRecord::best},
      {"ratio", &RunRecord::ratio},
      {"eoc", &RunRecord::eoc},
      {"eoc_best", &RunRecord::eoc_best},
      {"garding_min", &RunRecord::garding_min},
      {"garding_max", &RunRecord::garding_max},
      {"eps", &RunRecord::eps},
      {"norm_T", &RunRecord::norm_T},
      {"norm_T_theta", &RunRecord::norm_T_theta},
      {"inverse_constant", &RunRecord::inverse_constant},
      {"value", &RunRecord::value},
      {"value2", &RunRecord::value2},
  };
  return f;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(const RunRecord& r, const Field& f) {
  return std::visit(
      [&](auto m) -> std::string {
        using T = std::decay_t<decltype(r.*m)>;
        if constexpr (std::is_same_v<T, std::string>) return r.*m;
        else if constexpr (std::is_same_v<T, double>) return num(r.*m);
        else return std::to_string(r.*m);
      },
      f);
}

void set_cell(RunRecord& r, const Field& f, const std::string& s) {
  std::visit(
      [&](auto m) {
        using T = std::decay_t<decltype(r.*m)>;
        if constexpr (std::is_same_v<T, std::string>) r.*m = s;
        else if constexpr (std::is_same_v<T, double>) r.*m = std::strtod(s.c_str(), nullptr);
        else if constexpr (std::is_same_v<T, int>) r.*m = std::stoi(s);
        else r.*m = std::stoull(s);
      },
      f);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string header_line() { return "# fembem results v" + std::to_string(kCsvVersion); }

void check_nonempty(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("emit_results: no records");
}

nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Svg: return "svg";
  }
  return "csv";
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  if (s == "svg") return OutputFormat::Svg;
  throw std::invalid_argument("unknown output format: " + s);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c;
    for (const auto& f : fields()) c.push_back(f.first);
    return c;
  }();
  return cols;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  check_nonempty(records);
  std::ostringstream out;
  out << header_line() << "\n";
  const auto& fs = fields();
  for (size_t i = 0; i < fs.size(); ++i) out << (i ? "," : "") << fs[i].first;
  out << "\n";
  for (const RunRecord& r : records) {
    for (size_t i = 0; i < fs.size(); ++i) {
      std::string c = cell(r, fs[i].second);
      if (c.find_first_of(",\n\"") != std::string::npos)
        throw std::invalid_argument("records_to_csv: field contains a separator: " + c);
      out << (i ? "," : "") << c;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header_line())
    throw std::runtime_error("records_from_csv: missing or wrong version header");
  if (!std::getline(in, line) || split(line) != csv_columns())
    throw std::runtime_error("records_from_csv: column mismatch");
  const auto& fs = fields();
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != fs.size()) throw std::runtime_error("records_from_csv: wrong cell count");
    RunRecord r;
    for (size_t i = 0; i < fs.size(); ++i) set_cell(r, fs[i].second, cells[i]);
    out.push_back(r);
  }
  return out;
}

std::string timings_to_csv(const std::vector<RunRecord>& records) {
  check_nonempty(records);
  std::ostringstream out;
  out << "# fembem timings v" << kCsvVersion << "\n";
  out << "experiment,formulation,k,level,p,t_volume,t_bem,t_solve,t_measure\n";
  for (const RunRecord& r : records)
    out << r.experiment << "," << r.formulation << "," << num(r.k) << "," << r.level << "," << r.p << ","
        << num(r.t_volume) << "," << num(r.t_bem) << "," << num(r.t_solve) << "," << num(r.t_measure) << "\n";
  return out.str();
}

std::string records_to_json(const std::vector<RunRecord>& records, const std::vector<Verdict>& verdicts) {
  check_nonempty(records);
  nlohmann::json j;
  j["version"] = kCsvVersion;
  j["records"] = nlohmann::json::array();
  for (const RunRecord& r : records) {
    nlohmann::json o;
    for (const auto& [name, f] : fields()) {
      std::visit(
          [&](auto m) {
            using T = std::decay_t<decltype(r.*m)>;
            if constexpr (std::is_same_v<T, double>) o[name] = json_number(r.*m);
            else o[name] = r.*m;
          },
          f);
    }
    j["records"].push_back(o);
  }
  j["verdicts"] = nlohmann::json::array();
  for (const Verdict& v : verdicts)
    j["verdicts"].push_back({{"name", v.name}, {"pass", v.pass}, {"asserted", v.asserted}, {"detail", v.detail}});
  return j.dump(2) + "\n";
}

std::string records_to_svg(const std::vector<RunRecord>& records) {
  check_nonempty(records);
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records)
    if (r.h > 0.0 && std::isfinite(r.error) && r.error > 0.0)
      groups[r.experiment + " " + r.formulation + " k=" + num(r.k) + " p=" + std::to_string(r.p)].push_back(&r);
  double hmin = 1e300, hmax = 0.0, emin = 1e300, emax = 0.0;
  for (auto& [name, g] : groups) {
    std::sort(g.begin(), g.end(), [](auto a, auto b) { return a->h > b->h; });
    for (const RunRecord* r : g) {
      hmin = std::min(hmin, r->h);
      hmax = std::max(hmax, r->h);
      for (double e : {r->error, r->best})
        if (std::isfinite(e) && e > 0.0) {
          emin = std::min(emin, e);
          emax = std::max(emax, e);
        }
    }
  }
  const double W = 720, H = 520, L = 80, R = 240, T = 30, B = 60;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (groups.empty()) {
    s << "<text x=\"20\" y=\"40\" font-family=\"sans-serif\">no convergence data</text>\n</svg>\n";
    return s.str();
  }
  double lx0 = std::floor(std::log10(hmin)), lx1 = std::ceil(std::log10(hmax));
  double ly0 = std::floor(std::log10(emin)), ly1 = std::ceil(std::log10(emax));
  if (lx1 <= lx0) lx1 = lx0 + 1;
  if (ly1 <= ly0) ly1 = ly0 + 1;
  auto X = [&](double h) { return L + (std::log10(h) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto Y = [&](double e) { return H - B - (std::log10(e) - ly0) / (ly1 - ly0) * (H - T - B); };
  auto pt = [](double v) { return num(std::round(v * 100.0) / 100.0); };
  s << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = lx0; d <= lx1; d += 1.0)
    s << "<text x=\"" << pt(X(std::pow(10.0, d))) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e"
      << static_cast<int>(d) << "</text>\n";
  for (double d = ly0; d <= ly1; d += 1.0)
    s << "<text x=\"" << L - 8 << "\" y=\"" << pt(Y(std::pow(10.0, d)) + 4) << "\" text-anchor=\"end\">1e"
      << static_cast<int>(d) << "</text>\n";
  s << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">h</text>\n";
  s << "<text x=\"20\" y=\"" << (H - B + T) / 2 << "\" transform=\"rotate(-90 20 " << (H - B + T) / 2
    << ")\" text-anchor=\"middle\">error</text>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int gi = 0;
  for (const auto& [name, g] : groups) {
    const char* col = colors[gi % 6];
    for (int kind = 0; kind < 2; ++kind) {
      s << "<polyline fill=\"none\" stroke=\"" << col << "\"" << (kind ? " stroke-dasharray=\"5,4\"" : "")
        << " points=\"";
      for (const RunRecord* r : g) {
        double e = kind ? r->best : r->error;
        if (std::isfinite(e) && e > 0.0) s << pt(X(r->h)) << "," << pt(Y(e)) << " ";
      }
      s << "\"/>\n";
    }
    for (const RunRecord* r : g)
      s << "<circle cx=\"" << pt(X(r->h)) << "\" cy=\"" << pt(Y(r->error)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    if (g.size() >= 2) {
      const RunRecord* a = g[g.size() - 2];
      const RunRecord* b = g.back();
      double slope = b->p;
      double h0 = b->h, h1 = std::sqrt(a->h * b->h);
      double e0 = b->error * 0.5, e1 = e0 * std::pow(h1 / h0, slope);
      s << "<polygon fill=\"none\" stroke=\"" << col << "\" points=\"" << pt(X(h0)) << "," << pt(Y(e0)) << " "
        << pt(X(h1)) << "," << pt(Y(e0)) << " " << pt(X(h1)) << "," << pt(Y(e1)) << "\"/>\n";
      s << "<text x=\"" << pt(X(h1) + 4) << "\" y=\"" << pt((Y(e0) + Y(e1)) / 2) << "\" fill=\"" << col << "\">"
        << static_cast<int>(slope) << "</text>\n";
    }
    double ly = T + 16 + 34 * gi;
    s << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << col << "\"/>\n";
    s << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
    s << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly + 14 << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly + 14
      << "\" stroke=\"" << col << "\" stroke-dasharray=\"5,4\"/>\n";
    s << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 18 << "\">best approximation</text>\n";
    ++gi;
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void emit_results(const std::vector<RunRecord>& records, OutputFormat format, const std::string& path,
                  const std::vector<Verdict>& verdicts) {
  check_nonempty(records);
  std::string text;
  switch (format) {
    case OutputFormat::Csv: text = records_to_csv(records); break;
    case OutputFormat::Json: text = records_to_json(records, verdicts); break;
    case OutputFormat::Svg: text = records_to_svg(records); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_results: cannot open " + path);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("emit_results: write failed for " + path);
}

}  // namespace fembem
