// SPDX-License-Identifier: Apache-2.0

#include "kgspec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include "kgspec/errors.hpp"

namespace kgspec
{

namespace
{

std::vector<std::string> split(const std::string &line, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep))
    out.push_back(cur);
  if (!line.empty() && line.back() == sep)
    out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string &csv, std::vector<std::string> &header)
{
  std::istringstream is(csv);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(is, line))
  {
    if (line.empty())
      continue;
    if (first)
    {
      header = split(line, ',');
      first = false;
      continue;
    }
    rows.push_back(split(line, ','));
    if (rows.back().size() != header.size())
      throw ConfigError("CSV row has " + std::to_string(rows.back().size()) + " fields, header has " +
                        std::to_string(header.size()));
  }
  return rows;
}

double parse_double(const std::string &s)
{
  if (s == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  if (s == "-inf")
    return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError("not a number in CSV: '" + s + "'");
  return v;
}

nlohmann::json finite_or_null(double x)
{
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (x == 0.0)
    x = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void write_file_atomic(const std::filesystem::path &path, const std::string &content)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os)
      throw std::runtime_error("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os)
      throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string dump_json(const nlohmann::json &j)
{
  return j.dump(2) + "\n";
}

std::uint64_t content_hash(const std::string &bytes)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v)
{
  static const char *digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; i--)
  {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::string spectrum_csv(const SpectrumResult &spec, double cluster_tol)
{
  struct Row
  {
    cplx lambda;
    int mult;
    double residual;
    bool trusted;
  };
  std::vector<Row> rows;
  for (const ModeGroup &g : spec.groups)
  {
    double res = 0.0;
    for (const EigenMode &m : spec.modes)
    {
      if (m.trusted && std::abs(m.lambda - g.lambda) <= cluster_tol * (1.0 + std::abs(g.lambda)))
        res = std::max(res, m.residual);
    }
    rows.push_back({g.lambda, g.multiplicity, res, true});
  }
  for (const EigenMode &m : spec.modes)
  {
    if (!m.trusted)
      rows.push_back({m.lambda, 1, m.residual, false});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) {
    if (a.lambda.real() != b.lambda.real())
      return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  std::string out = "re_lambda,im_lambda,multiplicity,residual,trusted\n";
  for (const Row &r : rows)
  {
    out += format_double(r.lambda.real()) + "," + format_double(r.lambda.imag()) + "," + std::to_string(r.mult) + "," +
           format_double(r.residual) + "," + (r.trusted ? "1" : "0") + "\n";
  }
  return out;
}

TraceInput trace_input_from_csv(const std::string &csv, double cutoff, double tol_real)
{
  std::vector<std::string> header;
  const auto rows = csv_rows(csv, header);
  if (header != std::vector<std::string>{"re_lambda", "im_lambda", "multiplicity", "residual", "trusted"})
    throw ConfigError("unexpected spectrum CSV header");
  TraceInput in;
  in.cutoff = cutoff;
  for (const auto &r : rows)
  {
    if (r[4] != "1")
      continue;
    const cplx z(parse_double(r[0]), parse_double(r[1]));
    const int mult = std::stoi(r[2]);
    if (std::abs(z.imag()) <= tol_real)
      in.lines.push_back({z.real(), static_cast<double>(mult)});
    else
      for (int k = 0; k < mult; k++)
        in.complex_modes.push_back(z);
  }
  return in;
}

std::string orbits_csv(const std::vector<PeriodicOrbit> &orbits)
{
  const std::size_t d = orbits.empty() ? 0 : orbits.front().winding.size();
  std::string out = "period,primitive_period";
  for (std::size_t i = 0; i < d; i++)
    out += ",winding_" + std::to_string(i + 1);
  out += ",det_I_minus_P,stability,closure_defect\n";
  for (const PeriodicOrbit &o : orbits)
  {
    out += format_double(o.period) + "," + format_double(o.primitive_period);
    for (int w : o.winding)
      out += "," + std::to_string(w);
    out += "," + format_double(o.det_I_minus_P) + "," + o.stability + "," + format_double(o.closure_defect) + "\n";
  }
  return out;
}

std::vector<PeriodicOrbit> orbits_from_csv(const std::string &csv)
{
  std::vector<std::string> header;
  const auto rows = csv_rows(csv, header);
  if (header.size() < 5 || header[0] != "period" || header[1] != "primitive_period")
    throw ConfigError("unexpected orbit CSV header");
  const std::size_t d = header.size() - 5;
  std::vector<PeriodicOrbit> out;
  for (const auto &r : rows)
  {
    PeriodicOrbit o;
    o.period = parse_double(r[0]);
    o.primitive_period = parse_double(r[1]);
    for (std::size_t i = 0; i < d; i++)
      o.winding.push_back(std::stoi(r[2 + i]));
    o.det_I_minus_P = parse_double(r[2 + d]);
    o.stability = r[3 + d];
    o.closure_defect = parse_double(r[4 + d]);
    o.repetition = static_cast<int>(std::lround(o.period / o.primitive_period));
    out.push_back(o);
  }
  return out;
}

std::string trace_csv(const TraceProfile &profile)
{
  std::string out = "t,re_T,im_T,abs_T\n";
  for (std::size_t k = 0; k < profile.times.size(); k++)
  {
    const cplx v = profile.values[k];
    out += format_double(profile.times[k]) + "," + format_double(v.real()) + "," + format_double(v.imag()) + "," +
           format_double(std::abs(v)) + "\n";
  }
  return out;
}

nlohmann::json peaks_json(const PeakReport &report)
{
  nlohmann::json arr = nlohmann::json::array();
  for (const Peak &p : report.peaks)
  {
    nlohmann::json j;
    j["t_peak"] = p.t_peak;
    j["a_fit_re"] = p.fitted ? finite_or_null(p.fit.a.real()) : nullptr;
    j["a_fit_im"] = p.fitted ? finite_or_null(p.fit.a.imag()) : nullptr;
    j["abs_a_fit"] = p.fitted ? finite_or_null(std::abs(p.fit.a)) : nullptr;
    j["matched_period"] = finite_or_null(p.matched_period);
    j["orbit_ids"] = p.orbit_ids;
    j["predicted_modulus"] = finite_or_null(p.predicted_modulus);
    j["ratio"] = finite_or_null(p.ratio);
    arr.push_back(j);
  }
  return arr;
}

}  // namespace kgspec
