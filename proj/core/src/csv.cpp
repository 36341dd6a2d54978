// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "stagger/errors.hpp"

namespace stagger {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::int64_t parse_int(const std::string& s, std::size_t line_no, const char* what) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last)
    fail(Errc::BadConfig, std::string("line ") + std::to_string(line_no) +
                              ": cannot parse " + what + " '" + s + "' as integer");
  return v;
}

double parse_double(const std::string& s, std::size_t line_no, const char* what) {
  if (s.empty())
    fail(Errc::BadConfig, std::string("line ") + std::to_string(line_no) +
                              ": empty " + what + " field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    fail(Errc::BadConfig, std::string("line ") + std::to_string(line_no) +
                              ": cannot parse " + what + " '" + s + "' as number");
  return v;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

PanelInput read_panel_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) fail(Errc::EmptyPanel, "panel CSV has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);

  // Resolve column roles from the header.
  int c_unit = -1, c_time = -1, c_outcome = -1, c_cohort = -1;
  int c_exposure = -1, c_observed = -1;
  std::vector<int> c_x;  // index in header for x1, x2, ...
  for (int j = 0; j < static_cast<int>(header.size()); ++j) {
    const std::string h = lower(header[j]);
    if (h == "unit")
      c_unit = j;
    else if (h == "time")
      c_time = j;
    else if (h == "outcome")
      c_outcome = j;
    else if (h == "cohort")
      c_cohort = j;
    else if (h == "exposure")
      c_exposure = j;
    else if (h == "observed")
      c_observed = j;
    else if (h.size() >= 2 && h[0] == 'x' &&
             std::all_of(h.begin() + 1, h.end(),
                         [](unsigned char c) { return std::isdigit(c); })) {
      const int k = std::stoi(h.substr(1));
      if (k < 1) fail(Errc::BadConfig, "covariate columns must be named x1..xd");
      if (k > static_cast<int>(c_x.size())) c_x.resize(k, -1);
      c_x[k - 1] = j;
    } else {
      fail(Errc::BadConfig, "unknown panel CSV column '" + header[j] + "'");
    }
  }
  if (c_unit < 0 || c_time < 0 || c_outcome < 0 || c_cohort < 0)
    fail(Errc::BadConfig, "panel CSV requires unit,time,outcome,cohort columns");
  for (std::size_t j = 0; j < c_x.size(); ++j)
    if (c_x[j] < 0)
      fail(Errc::BadConfig, "covariate columns must be x1..xd without gaps (missing x" +
                                std::to_string(j + 1) + ")");

  PanelInput in;
  in.x.resize(c_x.size());
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      fail(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected " +
                                std::to_string(header.size()) + " fields, got " +
                                std::to_string(f.size()));
    in.unit.push_back(parse_int(f[c_unit], line_no, "unit"));
    in.time.push_back(parse_int(f[c_time], line_no, "time"));
    in.outcome.push_back(parse_double(f[c_outcome], line_no, "outcome"));
    const std::string coh = lower(f[c_cohort]);
    if (coh == "inf")
      in.cohort.push_back(kNever);
    else
      in.cohort.push_back(parse_int(f[c_cohort], line_no, "cohort"));
    for (std::size_t j = 0; j < c_x.size(); ++j)
      in.x[j].push_back(parse_double(f[c_x[j]], line_no, "covariate"));
    if (c_exposure >= 0)
      in.exposure.push_back(parse_double(f[c_exposure], line_no, "exposure"));
    if (c_observed >= 0) {
      const std::string o = f[c_observed];
      if (o != "0" && o != "1")
        fail(Errc::BadConfig,
             "line " + std::to_string(line_no) + ": observed must be 0 or 1");
      in.observed.push_back(o == "1" ? 1 : 0);
    }
  }
  if (in.unit.empty()) fail(Errc::EmptyPanel, "panel CSV has a header but no rows");
  return in;
}

PanelInput read_panel_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::IoError, "cannot open '" + path + "' for reading");
  return read_panel_csv(f);
}

void write_panel_csv(const Panel& p, std::ostream& os) {
  os << "unit,time,outcome,cohort";
  for (int j = 1; j <= p.dx(); ++j) os << ",x" << j;
  if (p.has_exposure()) os << ",exposure";
  const bool emit_observed = !p.fully_observed();
  if (emit_observed) os << ",observed";
  os << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (int i = 0; i < p.n(); ++i) {
    for (int t = 1; t <= p.T(); ++t) {
      os << p.unit_id(i) << ',' << (p.time_origin() + t - 1) << ',';
      num(p.y(i, t));
      os << ',';
      if (p.never_treated(i))
        os << "inf";
      else
        os << (p.time_origin() + p.cohort(i) - 1);
      for (int j = 0; j < p.dx(); ++j) {
        os << ',';
        num(p.xval(i, t, j));
      }
      if (p.has_exposure()) {
        os << ',';
        num(p.exposure(i));
      }
      if (emit_observed) os << ',' << (p.observed(i, t) ? 1 : 0);
      os << "\n";
    }
  }
}

void write_panel_csv_file(const Panel& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(Errc::IoError, "cannot open '" + path + "' for writing");
  write_panel_csv(p, f);
}

}  // namespace stagger
