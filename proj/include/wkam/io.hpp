#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/characteristics.hpp"
#include "wkam/fields.hpp"
#include "wkam/semigroup.hpp"

namespace wkam {

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Plain CSV writer; numbers go through format_number.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  /// Flushes the buffered rows to disk.
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(const std::string& v);
  CsvWriter& operator<<(const char* v) { return *this << std::string(v); }
  void end_row();

 private:
  void separator();
  std::string buffer_;
  std::filesystem::path path_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

/// k,t,j,x,u (1D) or k,t,j,x1,x2,u (2D); every `every`-th slice plus the last.
void write_spacetime(const std::filesystem::path& path, const SpaceTimeField& f,
                     std::size_t every = 1);
/// j,x,u or j,x1,x2,u
void write_field(const std::filesystem::path& path, const GridField& f);
void write_fixed_point(const std::filesystem::path& path, const FixedPointReport& r);
void write_convergence(const std::filesystem::path& path, const ConvergenceReport& r);
void write_action(const std::filesystem::path& path, const ActionTable& t);
void write_critical(const std::filesystem::path& path, const CriticalValueResult& r);
void write_trajectory(const std::filesystem::path& path, const Trajectory& tr, int dim);

/// Reads the last column of a field CSV with a header line.
GridField read_field(const std::filesystem::path& path, const Grid& grid);

}  // namespace wkam
