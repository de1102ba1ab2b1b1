#include "hml/path_grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hml {

std::size_t PathGrid::index_of(double t) const {
  const double x = (t - t0) / dt;
  const long long i = std::llround(x);
  if (i < 0 || i >= static_cast<long long>(values.size()) || std::abs(x - static_cast<double>(i)) > 0.5 + 1e-9)
    throw std::out_of_range("PathGrid::index_of: time off the grid");
  return static_cast<std::size_t>(i);
}

PathGrid make_path(double t0, double dt, std::vector<double> values, std::string meta) {
  if (values.size() < 2) throw std::invalid_argument("PathGrid: needs at least 2 values");
  if (!(dt > 0.0)) throw std::invalid_argument("PathGrid: dt must be positive");
  PathGrid p;
  p.t0 = t0;
  p.dt = dt;
  p.values = std::move(values);
  p.meta = std::move(meta);
  return p;
}

void write_csv(const PathGrid& p, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) throw std::runtime_error("write_csv: cannot open " + file);
  std::fputs("t,value\n", f);
  for (std::size_t i = 0; i < p.values.size(); ++i)
    std::fprintf(f, "%.17g,%.17g\n", p.time_at(i), p.values[i]);
  std::fclose(f);
}

PathGrid read_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("read_csv: cannot open " + file);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + file);
  std::vector<double> t, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("read_csv: malformed row in " + file);
    t.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  if (v.size() < 2) throw std::runtime_error("read_csv: fewer than 2 rows in " + file);
  return make_path(t.front(), (t.back() - t.front()) / static_cast<double>(t.size() - 1), std::move(v),
                   "source=csv");
}

static constexpr std::uint32_t kMagic = 0x47504d48u;  // "HMPG" little-endian
static constexpr std::uint32_t kVersion = 1u;

void write_binary(const PathGrid& p, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("write_binary: cannot open " + file);
  const std::uint64_t n = p.values.size();
  out.write(reinterpret_cast<const char*>(&kMagic), 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 4);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&p.t0), 8);
  out.write(reinterpret_cast<const char*>(&p.dt), 8);
  out.write(reinterpret_cast<const char*>(p.values.data()), static_cast<std::streamsize>(8 * n));
  if (!out) throw std::runtime_error("write_binary: short write to " + file);
}

PathGrid read_binary(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("read_binary: cannot open " + file);
  std::uint32_t magic = 0, version = 0;
  std::uint64_t n = 0;
  double t0 = 0.0, dt = 0.0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&t0), 8);
  in.read(reinterpret_cast<char*>(&dt), 8);
  if (!in || magic != kMagic) throw std::runtime_error("read_binary: bad magic in " + file);
  if (version != kVersion) throw std::runtime_error("read_binary: unsupported version in " + file);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(8 * n));
  if (!in) throw std::runtime_error("read_binary: truncated file " + file);
  return make_path(t0, dt, std::move(v), "source=binary");
}

}  // namespace hml
