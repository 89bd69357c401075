#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/error.hpp"

namespace qstab::harness {

enum class Status { pass, fail, rejected_divergent, rejected_open_problem };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::rejected_divergent: return "rejected-divergent";
    case Status::rejected_open_problem: return "rejected-open-problem";
  }
  return "?";
}

inline std::optional<Status> parse_status(const std::string& s) {
  for (Status v : {Status::pass, Status::fail, Status::rejected_divergent, Status::rejected_open_problem}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

inline bool is_rejection(Status s) { return s == Status::rejected_divergent || s == Status::rejected_open_problem; }

struct ResultRow {
  std::string scenario;
  std::string probe;  // coordinates, or a label for non-probe rows
  std::optional<double> norm_x;
  std::string q_estimate;
  std::optional<double> deviation;
  std::optional<double> bound;
  std::optional<double> margin;
  std::optional<int> iterations;
  Status status = Status::pass;
  std::string detail;
};

inline constexpr const char* kResultsHeader = "scenario,probe,norm_x,q_estimate,deviation,bound,margin,iterations,status,detail";
inline constexpr const char* kPlotHeader = "norm_x,deviation,bound";

enum class ExitCode : int { ok = 0, failure = 1, validation = 2, bound_violation = 3, expected_rejection = 4 };

/// 3 if any row failed, else 4 if any row is a rejection, else 0.
inline ExitCode exit_code_for(const std::vector<ResultRow>& rows) {
  bool rejected = false;
  for (const auto& r : rows) {
    if (r.status == Status::fail) return ExitCode::bound_violation;
    rejected = rejected || is_rejection(r.status);
  }
  return rejected ? ExitCode::expected_rejection : ExitCode::ok;
}

/// Shortest text that reads back as the same double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

/// Real 1x1 coordinates print as numbers; anything else prints each
/// coordinate's entries row-major as re+imi, rows separated by '|'.
inline std::string fmt(const ModulePoint& p) {
  std::string out;
  for (int i = 0; i < p.rank(); ++i) {
    if (i) out += ' ';
    const CMatrix& m = p[i].matrix();
    if (m.size() == 1 && m(0, 0).imag() == 0.0) {
      out += fmt(m(0, 0).real());
      continue;
    }
    out += '[';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r) out += '|';
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out += ' ';
        const Complex z = m(r, c);
        out += fmt(z.real());
        if (z.imag() != 0.0) out += (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
      }
    }
    out += ']';
  }
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::string opt_num(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

inline std::optional<double> read_num(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end && *end == '\0', ErrorKind::invalid_argument, where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += detail::csv_field(r.scenario) + ',' + detail::csv_field(r.probe) + ',' + detail::opt_num(r.norm_x) + ',' +
           detail::csv_field(r.q_estimate) + ',' + detail::opt_num(r.deviation) + ',' + detail::opt_num(r.bound) + ',' +
           detail::opt_num(r.margin) + ',' + (r.iterations ? std::to_string(*r.iterations) : std::string()) + ',' +
           to_string(r.status) + ',' + detail::csv_field(r.detail) + '\n';
  }
  return out;
}

inline std::vector<ResultRow> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kResultsHeader, ErrorKind::invalid_argument,
          std::string("results CSV must start with the header '") + kResultsHeader + "'");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto f = detail::split_csv_line(line);
    require(f.size() == 10, ErrorKind::invalid_argument, where + ": expected 10 fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.scenario = f[0];
    r.probe = f[1];
    r.norm_x = detail::read_num(f[2], where);
    r.q_estimate = f[3];
    r.deviation = detail::read_num(f[4], where);
    r.bound = detail::read_num(f[5], where);
    r.margin = detail::read_num(f[6], where);
    if (auto it = detail::read_num(f[7], where)) r.iterations = static_cast<int>(*it);
    const auto st = parse_status(f[8]);
    require(st.has_value(), ErrorKind::invalid_argument, where + ": unknown status '" + f[8] + "'");
    r.status = *st;
    r.detail = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

/// (norm_x, deviation, bound) for every row that has all three, sorted by
/// norm_x with ties broken by deviation then bound.
inline std::string emit_plotdata(const std::vector<ResultRow>& rows) {
  require(!rows.empty(), ErrorKind::invalid_argument, "no result rows to plot");
  struct Triple {
    double x, dev, bound;
  };
  std::vector<Triple> pts;
  for (const auto& r : rows) {
    if (r.norm_x && r.deviation && r.bound) pts.push_back({*r.norm_x, *r.deviation, *r.bound});
  }
  require(!pts.empty(), ErrorKind::invalid_argument, "no row carries norm_x, deviation and bound");
  std::stable_sort(pts.begin(), pts.end(), [](const Triple& a, const Triple& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.dev != b.dev) return a.dev < b.dev;
    return a.bound < b.bound;
  });
  std::string out = std::string(kPlotHeader) + "\n";
  for (const auto& t : pts) out += fmt(t.x) + ',' + fmt(t.dev) + ',' + fmt(t.bound) + '\n';
  return out;
}

/// QSTAB_OUT_DIR when set and non-empty, else the configured directory.
inline std::filesystem::path output_dir(const std::string& configured) {
  if (const char* env = std::getenv("QSTAB_OUT_DIR"); env && *env) return env;
  return configured;
}

/// Writes through a sibling temporary and renames, so readers never see a
/// half-written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::invalid_argument, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.close();
    require(!out.fail(), ErrorKind::invalid_argument, "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::invalid_argument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qstab::harness
