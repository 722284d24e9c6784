#include "wkam/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wkam/errors.hpp"

namespace wkam {

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  for (const auto& h : header) *this << h;
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_, std::ios::binary);
  out << buffer_;
}

void CsvWriter::separator() {
  if (in_row_ > 0) buffer_ += ',';
  ++in_row_;
}

CsvWriter& CsvWriter::operator<<(double v) {
  separator();
  buffer_ += format_number(v);
  if (in_row_ == columns_) end_row();
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  separator();
  buffer_ += std::to_string(v);
  if (in_row_ == columns_) end_row();
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  separator();
  buffer_ += v;
  if (in_row_ == columns_) end_row();
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ == 0) return;
  buffer_ += '\n';
  in_row_ = 0;
}

namespace {

void coords(CsvWriter& w, const TorusPoint& p) {
  w << p.x[0];
  if (p.dim == 2) w << p.x[1];
}

std::vector<std::string> with_coords(std::vector<std::string> head, int dim,
                                     const std::string& name, std::vector<std::string> tail) {
  if (dim == 1) {
    head.push_back(name);
  } else {
    head.push_back(name + "1");
    head.push_back(name + "2");
  }
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

void write_spacetime(const std::filesystem::path& path, const SpaceTimeField& f,
                     std::size_t every) {
  const Grid& g = f.grid();
  CsvWriter w(path, with_coords({"k", "t", "j"}, g.dim(), "x", {"u"}));
  if (every < 1) every = 1;
  for (std::size_t k = 0; k < f.n_slices(); ++k) {
    if (k % every != 0 && k + 1 != f.n_slices()) continue;
    const auto s = f.slice(k);
    for (std::size_t j = 0; j < g.size(); ++j) {
      w << k << f.time(k) << j;
      coords(w, g.point(j));
      w << s[j];
    }
  }
}

void write_field(const std::filesystem::path& path, const GridField& f) {
  const Grid& g = f.grid();
  CsvWriter w(path, with_coords({"j"}, g.dim(), "x", {"u"}));
  for (std::size_t j = 0; j < g.size(); ++j) {
    w << j;
    coords(w, g.point(j));
    w << f[j];
  }
}

void write_fixed_point(const std::filesystem::path& path, const FixedPointReport& r) {
  CsvWriter w(path, {"iter", "gap", "bound"});
  for (std::size_t k = 0; k < r.gaps.size(); ++k) {
    w << k << r.gaps[k] << (k < r.bounds.size() ? r.bounds[k] : 0.0);
  }
}

void write_convergence(const std::filesystem::path& path, const ConvergenceReport& r) {
  CsvWriter w(path, {"t", "increment"});
  for (std::size_t k = 0; k < r.times.size(); ++k) w << r.times[k] << r.increments[k];
}

void write_action(const std::filesystem::path& path, const ActionTable& t) {
  const Grid& g = t.grid;
  std::vector<std::string> head{"i", "j"};
  if (g.dim() == 1) {
    head.insert(head.end(), {"x_i", "x_j"});
  } else {
    head.insert(head.end(), {"x_i1", "x_i2", "x_j1", "x_j2"});
  }
  head.push_back("h");
  CsvWriter w(path, head);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      w << i << j;
      coords(w, g.point(i));
      coords(w, g.point(j));
      w << t(i, j);
    }
  }
}

void write_critical(const std::filesystem::path& path, const CriticalValueResult& r) {
  CsvWriter w(path, {"T", "estimate"});
  for (std::size_t k = 0; k < r.horizons.size(); ++k) w << r.horizons[k] << r.estimates[k];
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& tr, int dim) {
  std::vector<std::string> head{"t"};
  if (dim == 1) {
    head.insert(head.end(), {"x", "u", "p", "H"});
  } else {
    head.insert(head.end(), {"x1", "x2", "u", "p1", "p2", "H"});
  }
  CsvWriter w(path, head);
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& s = tr.states[k];
    w << s.t;
    coords(w, s.x);
    w << s.u << s.p[0];
    if (dim == 2) w << s.p[1];
    w << tr.H_values[k];
  }
}

GridField read_field(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("initial.csv", "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    const std::string last = pos == std::string::npos ? line : line.substr(pos + 1);
    double v = 0.0;
    auto res = std::from_chars(last.data(), last.data() + last.size(), v);
    if (res.ec != std::errc()) throw ConfigError("initial.csv", "bad number '" + last + "'");
    values.push_back(v);
  }
  if (values.size() != grid.size()) {
    throw ConfigError("initial.csv", "expected " + std::to_string(grid.size()) + " values, found " +
                                         std::to_string(values.size()));
  }
  return GridField(grid, std::move(values));
}

}  // namespace wkam
