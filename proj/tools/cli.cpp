#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "msts/calendar.hpp"
#include "msts/stats.hpp"

namespace msts::cli {

using json = nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string format_value(double v) {
  if (is_na(v)) return "NA";
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

Poly poly_from_json(const json& arr) {
  Poly p(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) p(i) = arr[i].get<double>();
  return p;
}

// Time columns: ISO date when a calendar start is known (daily and weekly
// periods), otherwise (year, index) in the series' own period.
std::string time_column_header(const Session& s) {
  if (s.start_date && (s.data.period >= 360 || s.data.period == 52))
    return "date";
  return "year,index";
}

std::string time_column_value(const Session& s, int t) {
  if (s.start_date && (s.data.period >= 360 || s.data.period == 52)) {
    int step = s.data.period == 52 ? 7 : 1;
    CalendarDate d = add_days(*s.start_date, step * t);
    std::ostringstream ss;
    ss << d.year << "-" << std::setw(2) << std::setfill('0') << d.month << "-"
       << std::setw(2) << std::setfill('0') << d.day;
    return ss.str();
  }
  int idx0 = s.data.start_index - 1 + t;
  int year = s.data.start_year + static_cast<int>(std::floor(
                                     static_cast<double>(idx0) / s.data.period));
  int idx = ((idx0 % s.data.period) + s.data.period) % s.data.period + 1;
  return std::to_string(year) + "," + std::to_string(idx);
}

}  // namespace

MatrixXd read_data_csv(const std::string& path, const std::string& na_token,
                       std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty data file: " + path);
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  // Leading time columns (as written by the output routines) are skipped.
  std::size_t skip = 0;
  while (skip < header.size() &&
         (header[skip] == "year" || header[skip] == "index" ||
          header[skip] == "date"))
    ++skip;
  if (names) names->assign(header.begin() + skip, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n,") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col++ < skip) continue;
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      std::string v = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      row.push_back(v == na_token || v.empty() ? na_value() : std::stod(v));
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);
  MatrixXd out(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::runtime_error("ragged CSV rows in " + path);
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

void write_data_csv(const std::string& path, const Session& s,
                    const MatrixXd& values, int lead_offset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << time_column_header(s);
  for (const auto& n : s.data.names) out << "," << n;
  out << "\n";
  for (int t = 0; t < values.rows(); ++t) {
    out << time_column_value(s, t - lead_offset);
    for (int c = 0; c < values.cols(); ++c)
      out << "," << format_value(values(t, c));
    out << "\n";
  }
}

namespace {

// --- model configuration ----------------------------------------------------

std::vector<int> vrank_from_json(const json& comp, int N) {
  std::vector<int> vrank;
  if (comp.contains("vrank") && !comp["vrank"].is_null())
    for (const auto& v : comp["vrank"]) vrank.push_back(v.get<int>() - 1);
  else
    for (int j = 0; j < N; ++j) vrank.push_back(j);
  return vrank;
}

ModelSpec model_from_config(const json& cfg, const TimeSeriesSample& data,
                            const std::optional<CalendarDate>& start_date);

Eigen::VectorXd holiday_regressor(const json& spec,
                                  const TimeSeriesSample& data,
                                  const CalendarDate& start_date) {
  auto dates = read_holiday_dates(spec.at("holiday_file").get<std::string>());
  const int fore = spec.value("fore", 0), aft = spec.value("aft", 0);
  if (data.period == 52) {
    // Weekly series: build the daily window regressor over the exact span
    // of the weekly sample, embed, and average within each week.
    WeeklySpan span = weekly_to_date(spec.value("first_day", 1),
                                     data.start_year, data.start_index,
                                     data.rows());
    DailyRegressor daily =
        gethol(dates, fore, aft, span.start, span.end);
    TimeSeriesSample weekly = daily_to_weekly(
        daily.values, spec.value("first_day", 1), span.start);
    Eigen::VectorXd out(weekly.rows());
    for (int t = 0; t < weekly.rows(); ++t) {
      double acc = 0.0;
      for (int j = 0; j < 7; ++j)
        acc += is_na(weekly.values(t, j)) ? 0.0 : weekly.values(t, j);
      out(t) = acc / 7.0;
    }
    if (out.size() != data.rows())
      throw std::runtime_error("holiday regressor length mismatch");
    return out;
  }
  // Daily series.
  CalendarDate end = add_days(start_date, data.rows() - 1);
  DailyRegressor reg = gethol(dates, fore, aft, start_date, end);
  return reg.values;
}

ModelSpec model_from_config(const json& cfg, const TimeSeriesSample& data,
                            const std::optional<CalendarDate>& start_date) {
  const json& mc = cfg.at("model");
  ModelSpec mdl = make_model(data.cols(), data.rows());
  for (const auto& comp : mc.at("components")) {
    std::optional<ParamBounds> bounds;
    if (comp.contains("bounds") && !comp["bounds"].is_null()) {
      ParamBounds b;
      const auto& arr = comp["bounds"];
      b.rho_lo = arr[0].get<double>();
      b.rho_hi = arr[1].get<double>();
      if (arr.size() >= 4) {
        b.omega_lo = arr[2].get<double>();
        b.omega_hi = arr[3].get<double>();
      }
      bounds = b;
    }
    std::vector<int> order;
    if (comp.contains("order"))
      for (const auto& o : comp["order"]) order.push_back(o.get<int>());
    mdl = add_component(mdl, vrank_from_json(comp, data.cols()),
                        component_kind_from_name(comp.at("class")),
                        order, bounds, comp.value("name", "component"),
                        poly_from_json(comp.at("delta")));
  }
  mdl = mean_init(mdl, mc.value("trend_extra", 0));
  if (mc.contains("regressors")) {
    for (const auto& rc : mc["regressors"]) {
      RegressorEntry reg;
      reg.label = rc.at("label").get<std::string>();
      if (rc.contains("values")) {
        reg.values = poly_from_json(rc["values"]);
      } else if (rc.contains("file")) {
        std::vector<std::string> names;
        MatrixXd v = read_data_csv(rc["file"].get<std::string>(), "NA", &names);
        reg.values = v.col(0);
      } else if (rc.contains("holiday_file")) {
        if (!start_date)
          throw std::runtime_error(
              "holiday regressors need a calendar start_date");
        reg.values = holiday_regressor(rc, data, *start_date);
      } else {
        throw std::runtime_error("regressor needs values, file, or holiday_file");
      }
      if (reg.values.size() != data.rows())
        throw std::runtime_error("regressor '" + reg.label +
                                 "' length != sample size");
      std::vector<int> series;
      if (rc.contains("series")) {
        if (rc["series"].is_array())
          for (const auto& s : rc["series"]) series.push_back(s.get<int>() - 1);
        else
          series.push_back(rc["series"].get<int>() - 1);
      } else {
        for (int j = 0; j < data.cols(); ++j) series.push_back(j);
      }
      const double null_tol = mc.value("null_tol", 1e-8);
      for (int j : series) mdl = add_regressor(mdl, j, reg, null_tol);
    }
  }
  return mdl;
}

Constraint constraint_from_config(const json& cfg, const ModelSpec& mdl) {
  Constraint con;
  if (!cfg.contains("model")) return con;
  const json& mc = cfg["model"];
  if (!mc.contains("constraints")) return con;
  const json& cc = mc["constraints"];
  if (cc.contains("file"))
    con = stack_constraints(
        con, read_constraint_csv(cc["file"].get<std::string>(),
                                 psi_length(mdl)));
  if (cc.contains("equal_regressors")) {
    for (const auto& group : cc["equal_regressors"]) {
      std::vector<std::vector<int>> regindex(mdl.N);
      for (const auto& pair : group) {
        int series = pair[0].get<int>() - 1;
        int reg = pair[1].get<int>() - 1;
        regindex.at(series).push_back(reg);
      }
      con = stack_constraints(con, constrain_reg(mdl, regindex));
    }
  }
  return con;
}

}  // namespace

Session load_session(const std::string& config_path) {
  json cfg = read_json_file(config_path);
  const json& dc = cfg.at("data");
  Session s;
  std::vector<std::string> names;
  MatrixXd raw = read_data_csv(dc.at("path").get<std::string>(),
                               dc.value("na_token", "NA"), &names);
  s.data.period = dc.value("period", 1);
  s.data.start_year = dc.at("start")[0].get<int>();
  s.data.start_index = dc.at("start")[1].get<int>();
  if (dc.contains("start_date")) {
    CalendarDate d{dc["start_date"][0].get<int>(),
                   dc["start_date"][1].get<int>(),
                   dc["start_date"][2].get<int>()};
    s.start_date = d;
  }
  // subset of series
  std::vector<int> cols;
  if (dc.contains("subseries") && !dc["subseries"].is_null())
    for (const auto& v : dc["subseries"]) cols.push_back(v.get<int>() - 1);
  else
    for (int j = 0; j < raw.cols(); ++j) cols.push_back(j);
  MatrixXd sel(raw.rows(), cols.size());
  s.data.names.clear();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    sel.col(j) = raw.col(cols[j]);
    s.data.names.push_back(cols[j] < static_cast<int>(names.size())
                               ? names[cols[j]]
                               : "series" + std::to_string(cols[j] + 1));
  }
  // temporal range
  if (dc.contains("range") && !dc["range"].is_null()) {
    auto to_row = [&](const json& p) {
      return (p[0].get<int>() - s.data.start_year) * s.data.period +
             (p[1].get<int>() - s.data.start_index);
    };
    int r0 = to_row(dc["range"][0]);
    int r1 = to_row(dc["range"][1]);
    if (r0 < 0 || r1 >= sel.rows() || r1 < r0)
      throw std::runtime_error("range outside the sample");
    MatrixXd cut = sel.middleRows(r0, r1 - r0 + 1);
    sel = cut;
    s.data.start_year += (s.data.start_index - 1 + r0) / s.data.period;
    s.data.start_index = (s.data.start_index - 1 + r0) % s.data.period + 1;
    if (s.start_date) s.start_date = add_days(*s.start_date, r0);
  }
  // cross-sectional aggregation
  if (dc.value("aggregate", false)) {
    MatrixXd agg(sel.rows(), 1);
    for (int t = 0; t < sel.rows(); ++t) {
      double acc = 0.0;
      for (int j = 0; j < sel.cols(); ++j) acc += sel(t, j);
      agg(t, 0) = acc;  // NaN propagates if any member is missing
    }
    sel = agg;
    s.data.names = {"aggregate"};
  }
  s.transform = dc.value("transform", "none");
  if (s.transform == "log") {
    for (int t = 0; t < sel.rows(); ++t)
      for (int j = 0; j < sel.cols(); ++j)
        if (!is_na(sel(t, j))) {
          if (sel(t, j) <= 0.0)
            throw std::runtime_error("log transform needs positive data");
          sel(t, j) = std::log(sel(t, j));
        }
  } else if (s.transform != "none") {
    throw std::runtime_error("unknown transform: " + s.transform);
  }
  s.data.values = sel;
  s.mdl = model_from_config(cfg, s.data, s.start_date);
  s.constraint = constraint_from_config(cfg, s.mdl);
  return s;
}

namespace {

// --- bundle persistence ------------------------------------------------------

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      if (is_na(m(i, j)))
        row.push_back(nullptr);
      else
        row.push_back(m(i, j));
    }
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_json(const json& rows) {
  MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(i, j) = rows[i][j].is_null() ? na_value() : rows[i][j].get<double>();
  return m;
}

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

VectorXd vector_from_json(const json& arr) {
  VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json session_to_json(const Session& s) {
  json j;
  j["period"] = s.data.period;
  j["start"] = {s.data.start_year, s.data.start_index};
  if (s.start_date)
    j["start_date"] = {s.start_date->month, s.start_date->day,
                       s.start_date->year};
  j["names"] = s.data.names;
  j["transform"] = s.transform;
  j["values"] = matrix_to_json(s.data.values);
  json comps = json::array();
  for (const auto& c : s.mdl.components) {
    json cc;
    cc["class"] = component_kind_name(c.kind);
    cc["order"] = c.order;
    json vr = json::array();
    for (int v : c.vrank) vr.push_back(v + 1);
    cc["vrank"] = vr;
    cc["bounds"] = {c.bounds.rho_lo, c.bounds.rho_hi, c.bounds.omega_lo,
                    c.bounds.omega_hi};
    cc["name"] = c.name;
    cc["delta"] = vector_to_json(c.delta);
    comps.push_back(cc);
  }
  j["components"] = comps;
  json regs = json::array();
  for (int series = 0; series < s.mdl.N; ++series) {
    json list = json::array();
    for (const auto& r : s.mdl.regressors[series]) {
      json rr;
      rr["label"] = r.label;
      rr["values"] = vector_to_json(r.values);
      list.push_back(rr);
    }
    regs.push_back(list);
  }
  j["regressors"] = regs;
  if (!s.constraint.empty()) {
    j["constraint"] = {{"C", matrix_to_json(s.constraint.C)},
                       {"b", vector_to_json(s.constraint.b)}};
  }
  return j;
}

Session session_from_json(const json& j) {
  Session s;
  s.data.period = j.at("period").get<int>();
  s.data.start_year = j.at("start")[0].get<int>();
  s.data.start_index = j.at("start")[1].get<int>();
  if (j.contains("start_date"))
    s.start_date = CalendarDate{j["start_date"][0].get<int>(),
                                j["start_date"][1].get<int>(),
                                j["start_date"][2].get<int>()};
  s.data.names = j.at("names").get<std::vector<std::string>>();
  s.transform = j.value("transform", "none");
  s.data.values = matrix_from_json(j.at("values"));
  s.mdl = make_model(s.data.cols(), s.data.rows());
  for (const auto& cc : j.at("components")) {
    std::vector<int> vrank;
    for (const auto& v : cc.at("vrank")) vrank.push_back(v.get<int>() - 1);
    ParamBounds b;
    b.rho_lo = cc.at("bounds")[0].get<double>();
    b.rho_hi = cc.at("bounds")[1].get<double>();
    b.omega_lo = cc.at("bounds")[2].get<double>();
    b.omega_hi = cc.at("bounds")[3].get<double>();
    s.mdl = add_component(s.mdl, vrank,
                          component_kind_from_name(cc.at("class")),
                          cc.at("order").get<std::vector<int>>(), b,
                          cc.at("name").get<std::string>(),
                          poly_from_json(cc.at("delta")));
  }
  const auto& regs = j.at("regressors");
  for (int series = 0; series < s.mdl.N; ++series)
    for (const auto& rr : regs[series])
      s.mdl.regressors[series].push_back(
          {rr.at("label").get<std::string>(),
           vector_from_json(rr.at("values"))});
  if (j.contains("constraint")) {
    s.constraint.C = matrix_from_json(j["constraint"]["C"]);
    s.constraint.b = vector_from_json(j["constraint"]["b"]);
  }
  return s;
}

struct Bundle {
  Session session;
  VectorXd psi;
  double divergence = 0.0;
  MatrixXd hessian;
};

void write_bundle(const std::string& path, const Bundle& b) {
  json j = session_to_json(b.session);
  j["psi"] = vector_to_json(b.psi);
  j["divergence"] = b.divergence;
  if (b.hessian.size() > 0) j["hessian"] = matrix_to_json(b.hessian);
  std::ostringstream data_repr;
  data_repr << b.session.data.values;
  j["data_digest"] = fnv1a(data_repr.str());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write bundle: " + path);
  out << std::setprecision(17) << j.dump(1) << "\n";
}

Bundle read_bundle(const std::string& path) {
  json j = read_json_file(path);
  Bundle b;
  b.session = session_from_json(j);
  b.psi = vector_from_json(j.at("psi"));
  b.divergence = j.value("divergence", 0.0);
  if (j.contains("hessian")) b.hessian = matrix_from_json(j["hessian"]);
  return b;
}

// --- reports -----------------------------------------------------------------

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  std::ostringstream ss;
  ss << std::setprecision(7) << v;
  return ss.str();
}

void print_conditions(std::ostream& os, const ModelSpec& mdl,
                      const ParamSet& par) {
  os << "log condition numbers (one row per component):\n";
  for (std::size_t k = 0; k < mdl.components.size(); ++k) {
    Eigen::MatrixXd sigma = par.covars[k].sigma();
    VectorXd tau = conditions(sigma);
    os << "  " << mdl.components[k].name;
    for (int j = 0; j < tau.size(); ++j) os << " " << fmt(tau(j));
    os << "\n";
  }
}

void write_triple_csv(const std::string& path, const Session& s,
                      const ExtractionTriple& ex, int lead, double displace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << time_column_header(s);
  for (const auto& n : s.data.names)
    out << "," << n << "_point," << n << "_upper," << n << "_lower";
  out << "\n";
  for (int t = 0; t < ex.point.rows(); ++t) {
    out << time_column_value(s, t - lead);
    for (int c = 0; c < ex.point.cols(); ++c)
      out << "," << format_value(ex.point(t, c) + displace) << ","
          << format_value(ex.upper(t, c) + displace) << ","
          << format_value(ex.lower(t, c) + displace);
    out << "\n";
  }
}

// Minimal SVG: one panel per series with the band polygon and point line.
void write_svg(const std::string& path, const Session& s,
               const ExtractionTriple& ex) {
  const int T = static_cast<int>(ex.point.rows());
  const int N = static_cast<int>(ex.point.cols());
  const int W = 900, H = 220;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << H * N << "'>\n";
  for (int c = 0; c < N; ++c) {
    double lo = 1e300, hi = -1e300;
    for (int t = 0; t < T; ++t) {
      lo = std::min(lo, ex.lower(t, c));
      hi = std::max(hi, ex.upper(t, c));
    }
    if (hi <= lo) hi = lo + 1.0;
    auto xmap = [&](int t) { return 40.0 + (W - 60.0) * t / std::max(1, T - 1); };
    auto ymap = [&](double v) {
      return H * c + 20.0 + (H - 40.0) * (hi - v) / (hi - lo);
    };
    out << "<polygon fill='#c8d8f0' stroke='none' points='";
    for (int t = 0; t < T; ++t)
      out << xmap(t) << "," << ymap(ex.upper(t, c)) << " ";
    for (int t = T - 1; t >= 0; --t)
      out << xmap(t) << "," << ymap(ex.lower(t, c)) << " ";
    out << "'/>\n<polyline fill='none' stroke='#204080' points='";
    for (int t = 0; t < T; ++t)
      out << xmap(t) << "," << ymap(ex.point(t, c)) << " ";
    out << "'/>\n<text x='8' y='" << H * c + 16 << "' font-size='12'>"
        << s.data.names[c] << "</text>\n";
  }
  out << "</svg>\n";
}

std::filesystem::path out_path(const CommandOptions& opt,
                               const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return std::filesystem::path(opt.out_dir) / name;
}

}  // namespace

// --- commands -----------------------------------------------------------------

int cmd_fit(const CommandOptions& opt) {
  json cfg = read_json_file(opt.config_path);
  Session s = load_session(opt.config_path);
  const json fc = cfg.value("fit", json::object());
  std::string method = !opt.method.empty() ? opt.method
                                           : fc.value("method", "mle");
  OptimOptions oopt;
  oopt.grad_tol = fc.value("grad_tol", 1e-6);
  oopt.max_evals = fc.value("max_evals", 10000);

  Bundle b;
  b.session = s;
  ParamSet init = default_param(s.mdl, s.constraint);
  if (fc.contains("psi_init"))
    init = psi_to_par(vector_from_json(fc["psi_init"]), s.mdl);

  if (method == "mom" || fc.value("init", "default") == "mom") {
    ParamSet mom = mom_fit(s.data.values, init, s.mdl);
    ReduceResult red =
        reduce(s.mdl, mom, fc.value("mom_thresh", -6.22), true);
    if (!s.constraint.empty() &&
        psi_length(red.mdl) != psi_length(s.mdl))
      throw std::runtime_error(
          "rank reduction changed the pre-parameter layout; constraints "
          "must be restated for the reduced model");
    b.session.mdl = red.mdl;
    init = red.par;
    if (method == "mom") {
      b.psi = par_to_psi(init, b.session.mdl);
      b.divergence = lik(b.psi, b.session.mdl, s.data.values);
      write_bundle(out_path(opt, "bundle.json").string(), b);
      if (!opt.quiet) {
        std::cout << "method-of-moments divergence: "
                  << std::setprecision(10) << b.divergence << "\n";
        print_conditions(std::cout, b.session.mdl, init);
      }
      return 0;
    }
  }
  FitResult fit =
      mle_fit(s.data.values, init, s.constraint, b.session.mdl, oopt, true);
  b.psi = fit.psi_hat;
  b.divergence = fit.divergence;
  b.hessian = fit.hessian;
  write_bundle(out_path(opt, "bundle.json").string(), b);
  if (!opt.quiet) {
    std::cout << "divergence: " << std::setprecision(10) << fit.divergence
              << (fit.converged ? "" : "  [not converged]") << "\n"
              << "evaluations: " << fit.evaluations << "\n";
    print_conditions(std::cout, b.session.mdl, fit.param_hat);
    VectorXd t = tstats(b.session.mdl, fit.psi_hat, fit.hessian, s.constraint);
    std::cout << "pre-parameter t statistics:\n ";
    for (int i = 0; i < t.size(); ++i) std::cout << " " << fmt(t(i));
    std::cout << "\n";
  }
  return 0;
}

int cmd_diagnose(const CommandOptions& opt) {
  Bundle b = read_bundle(opt.bundle_path);
  const Session& s = b.session;
  ResidResult rr = resid(b.psi, s.mdl, s.data.values);
  Session rs = s;  // residuals start after the differencing warm-up
  const int d = static_cast<int>(s.mdl.full_delta().size()) - 1;
  write_data_csv(out_path(opt, "residuals.csv").string(), rs, rr.residuals,
                 -d);
  const int lag = std::min(4 * s.data.period,
                           static_cast<int>(rr.residuals.rows()) - 1);
  auto [stat, p] = portmanteau(rr.residuals, lag, b.psi.size());
  VectorXd normal_p = gauss_check(rr.residuals);
  std::ofstream rep(out_path(opt, "diagnostics.txt"));
  rep << std::setprecision(10);
  rep << "portmanteau " << stat << " " << p << "\n";
  rep << "normality";
  for (int j = 0; j < normal_p.size(); ++j) rep << " " << normal_p(j);
  rep << "\n";
  if (!opt.quiet) {
    std::cout << "portmanteau: " << stat << " " << p << "\n normality p:";
    for (int j = 0; j < normal_p.size(); ++j) std::cout << " " << normal_p(j);
    std::cout << "\n";
  }
  // residual autocorrelations
  std::ofstream acf(out_path(opt, "residual_acf.csv"));
  acf << "lag";
  for (const auto& n : s.data.names) acf << "," << n;
  acf << "\n";
  const auto& e = rr.residuals;
  for (int h = 0; h <= lag; ++h) {
    acf << h;
    for (int c = 0; c < e.cols(); ++c) {
      double num = 0.0, den = 0.0;
      double mean = e.col(c).mean();
      for (int t = h; t < e.rows(); ++t)
        num += (e(t, c) - mean) * (e(t - h, c) - mean);
      for (int t = 0; t < e.rows(); ++t)
        den += (e(t, c) - mean) * (e(t, c) - mean);
      acf << "," << format_value(num / den);
    }
    acf << "\n";
  }
  return 0;
}

int cmd_extract(const CommandOptions& opt) {
  Bundle b = read_bundle(opt.bundle_path);
  const Session& s = b.session;
  json cfg = opt.config_path.empty() ? json::object()
                                     : read_json_file(opt.config_path);
  json xc = cfg.value("extract", json::object());
  const int grid = opt.grid.value_or(xc.value("grid", 7000));
  const int window = opt.window.value_or(xc.value("window", 50));
  const int horizon = opt.horizon.value_or(xc.value("horizon", 0));
  const double displace = xc.value("displace", 0.0);
  ParamSet par = psi_to_par(b.psi, s.mdl);

  json signals = xc.value("signals", json::array());
  if (signals.empty()) {
    // default: every single component
    for (std::size_t k = 0; k < s.mdl.components.size(); ++k) {
      json sig;
      sig["name"] = s.mdl.components[k].name;
      sig["components"] = json::array({k + 1});
      signals.push_back(sig);
    }
  }
  for (const auto& sig : signals) {
    std::string name = sig.at("name").get<std::string>();
    std::vector<int> comps;
    for (const auto& c : sig.at("components")) comps.push_back(c.get<int>() - 1);
    MatPoly target;
    if (sig.contains("target"))
      for (const auto& coef : sig["target"])
        target.push_back(Eigen::MatrixXd::Identity(s.mdl.N, s.mdl.N) *
                         coef.get<double>());
    std::string method = sig.value("method", xc.value("method", "wk"));
    ExtractionTriple ex;
    int lead = horizon;
    if (method == "matrix") {
      SignalMatrices sm = signal_matrix(s.mdl, par, comps);
      ex = extract(s.data.values, sm, s.mdl, par);
      lead = 0;
    } else {
      ex = wk_extract(b.psi, s.mdl, s.data.values, comps, target, grid,
                      window, horizon, true);
    }
    write_triple_csv(out_path(opt, name + ".csv").string(), s, ex, lead,
                     displace);
    if (xc.value("svg", false))
      write_svg(out_path(opt, name + ".svg").string(), s, ex);
    if (opt.want_frf) {
      auto u = frf(s.mdl, par, comps, grid, target);
      std::ofstream ff(out_path(opt, name + "_frf.csv"));
      ff << "lambda";
      for (int i = 0; i < s.mdl.N; ++i)
        for (int j = 0; j < s.mdl.N; ++j)
          ff << ",re_" << i + 1 << j + 1 << ",im_" << i + 1 << j + 1;
      ff << "\n" << std::setprecision(12);
      for (std::size_t m = 0; m < u.size(); ++m) {
        ff << (3.14159265358979323846 * m / grid);
        for (int i = 0; i < s.mdl.N; ++i)
          for (int j = 0; j < s.mdl.N; ++j)
            ff << "," << u[m](i, j).real() << "," << u[m](i, j).imag();
        ff << "\n";
      }
    }
    if (opt.want_wk_coeffs) {
      WkFilter wk = wk_coeffs(s.mdl, par, comps, target, grid, window);
      write_filter_csv(out_path(opt, name + "_wk.csv").string(), wk.kernel);
      if (wk.tail_bound > 1e-4)
        std::cerr << "warning: " << name
                  << " truncation tail approximately " << wk.tail_bound
                  << "; increase --window\n";
    }
  }

  // user-supplied filters
  for (const auto& ac : xc.value("adhoc", json::array())) {
    std::string name = ac.at("name").get<std::string>();
    FilterKernel kernel;
    if (ac.contains("filter_file")) {
      kernel = read_filter_csv(ac["filter_file"].get<std::string>());
    } else if (ac.contains("x11")) {
      X11Filters f =
          x11_filters(ac.at("period").get<double>(), ac.value("p_seas", 1));
      const ScalarFilter& sf = ac["x11"] == "trend"
                                   ? f.trend
                                   : (ac["x11"] == "seasonal" ? f.seasonal
                                                              : f.sa);
      ScalarFilter chosen = sf;
      if (ac.contains("embed")) {
        kernel = hi_to_low(chosen, ac["embed"].get<int>());
      } else {
        kernel.shift = chosen.shift;
        for (int i = 0; i < chosen.coeffs.size(); ++i)
          kernel.coeffs.push_back(
              Eigen::MatrixXd::Identity(s.mdl.N, s.mdl.N) * chosen.coeffs(i));
      }
    } else {
      throw std::runtime_error("adhoc entry needs filter_file or x11");
    }
    ExtractionTriple ex =
        adhoc_extract(b.psi, s.mdl, s.data.values, kernel, horizon, true);
    write_triple_csv(out_path(opt, name + ".csv").string(), s, ex, horizon,
                     displace);
    if (xc.value("svg", false))
      write_svg(out_path(opt, name + ".svg").string(), s, ex);
  }
  return 0;
}

int cmd_cast(const CommandOptions& opt) {
  Bundle b = read_bundle(opt.bundle_path);
  const Session& s = b.session;
  const int span = opt.span.value_or(50);
  ParamSet par = psi_to_par(b.psi, s.mdl);
  ExtractionTriple ex = cast_extract(s.data.values, s.mdl, par, span);
  write_triple_csv(out_path(opt, "casts.csv").string(), s, ex, span, 0.0);
  return 0;
}

int cmd_filters(const CommandOptions& opt) {
  json cfg = read_json_file(opt.config_path);
  const json& fc = cfg.at("filters");
  X11Filters f = x11_filters(fc.at("period").get<double>(),
                             fc.value("p_seas", 1));
  auto scalar_kernel = [](const ScalarFilter& sf) {
    FilterKernel k;
    k.shift = sf.shift;
    for (int i = 0; i < sf.coeffs.size(); ++i)
      k.coeffs.push_back(Eigen::MatrixXd::Constant(1, 1, sf.coeffs(i)));
    return k;
  };
  write_filter_csv(out_path(opt, "trend_filter.csv").string(),
                   scalar_kernel(f.trend));
  write_filter_csv(out_path(opt, "seasonal_filter.csv").string(),
                   scalar_kernel(f.seasonal));
  write_filter_csv(out_path(opt, "sa_filter.csv").string(),
                   scalar_kernel(f.sa));
  if (fc.contains("embed")) {
    const int sfac = fc["embed"].get<int>();
    write_filter_csv(out_path(opt, "trend_filter_embedded.csv").string(),
                     hi_to_low(f.trend, sfac));
    write_filter_csv(out_path(opt, "sa_filter_embedded.csv").string(),
                     hi_to_low(f.sa, sfac));
  }
  return 0;
}

int cmd_simulate(const CommandOptions& opt) {
  json cfg = read_json_file(opt.config_path);
  const json& sc = cfg.at("simulate");
  const int N = sc.at("N").get<int>();
  const int T = sc.at("T").get<int>();
  TimeSeriesSample shell;
  shell.values = Eigen::MatrixXd::Zero(T, N);
  shell.period = cfg["data"].value("period", 1);
  shell.start_year = cfg["data"].at("start")[0].get<int>();
  shell.start_index = cfg["data"].at("start")[1].get<int>();
  for (int j = 0; j < N; ++j)
    shell.names.push_back("series" + std::to_string(j + 1));
  if (cfg["data"].contains("names"))
    shell.names = cfg["data"]["names"].get<std::vector<std::string>>();

  Session s;
  s.data = shell;
  s.mdl = model_from_config(cfg, shell, std::nullopt);
  VectorXd psi = sc.contains("psi") ? vector_from_json(sc["psi"])
                                     : VectorXd::Zero(psi_length(s.mdl));
  if (psi.size() != psi_length(s.mdl))
    throw std::runtime_error("simulate: psi length mismatch");
  const long seed = opt.seed.value_or(sc.value("seed", 1));
  ParamSet par = psi_to_par(psi, s.mdl);
  MatrixXd y = simulate(s.mdl, par, T, sc.value("burn", 100),
                        static_cast<std::uint64_t>(seed));
  s.transform = cfg["data"].value("transform", "none");
  if (s.transform == "log") y = y.array().exp();
  write_data_csv(out_path(opt, "simulated.csv").string(), s, y);
  json truth;
  truth["psi"] = vector_to_json(psi);
  truth["seed"] = seed;
  std::ofstream tf(out_path(opt, "generating_psi.json"));
  tf << truth.dump(1) << "\n";
  return 0;
}

}  // namespace msts::cli
