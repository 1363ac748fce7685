#include "vou/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "vou/error.hpp"
#include "vou/rng.hpp"

namespace vou {

namespace {

constexpr std::array<char, 8> kMagic{'V', 'O', 'U', 'P', 'A', 'T', 'H', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw ValidationError("path batch: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("not a number: '" + s + "'");
  return x;
}

std::string csv_value(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return csv_field(v.get<std::string>());
  return csv_field(v.dump());
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < report.columns.size(); ++i) os << (i ? "," : "") << csv_field(report.columns[i]);
  os << "\r\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
      if (i) os << ',';
      const auto it = row.find(report.columns[i]);
      if (it != row.end()) os << csv_value(*it);
    }
    os << "\r\n";
  }
  return os.str();
}

std::string path_csv(const SamplePath& path) {
  std::ostringstream os;
  const bool noise = !path.noise.empty();
  os << (noise ? "t,X,xi\r\n" : "t,X\r\n");
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    os << format_double(path.grid_step * static_cast<double>(k)) << ',' << format_double(path.values[k]);
    if (noise) os << ',' << (k == 0 || k > path.noise.size() ? "" : format_double(path.noise[k - 1]));
    os << "\r\n";
  }
  return os.str();
}

std::string resolvent_csv(const SecondKindResolvent& res) {
  std::ostringstream os;
  os << "t,E_beta\r\n";
  const auto& e = res.values();
  for (std::size_t k = 0; k < e.size(); ++k) {
    os << format_double(res.grid_step() * static_cast<double>(k)) << ',' << format_double(e[k]) << "\r\n";
  }
  return os.str();
}

std::string estimate_csv_header() { return "method,T,n,m,b_hat,beta_hat,f_denominator,seed\r\n"; }

std::string estimate_csv_row(const DriftEstimate& e, std::uint64_t seed) {
  std::ostringstream os;
  os << to_string(e.method) << ',' << format_double(e.horizon) << ',' << e.n << ',' << e.m << ','
     << format_double(e.b_hat) << ',' << format_double(e.beta_hat) << ',' << format_double(e.f_denominator) << ','
     << seed << "\r\n";
  return os.str();
}

void write_path_batch(std::ostream& out, const KernelSpec& kernel, const VouParams& params, std::uint64_t seed,
                      const std::vector<SamplePath>& paths) {
  if (paths.empty()) throw UsageError("path batch: no paths");
  const std::size_t steps = paths.front().steps();
  for (const auto& p : paths) {
    if (p.steps() != steps || p.grid_step != paths.front().grid_step) {
      throw UsageError("path batch: paths must share the grid");
    }
  }
  nlohmann::json k;
  to_json(k, kernel);
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& p : paths) seeds.push_back(p.seed);
  const nlohmann::json header{{"kernel", k},
                              {"params", {{"b", params.b}, {"beta", params.beta}, {"sigma", params.sigma},
                                          {"x0", params.x0}}},
                              {"seed", seed},
                              {"seed_rule", "path_seed(seed, i)"},
                              {"path_seeds", seeds},
                              {"scheme", to_string(paths.front().scheme)},
                              {"grid_step", paths.front().grid_step},
                              {"steps", steps},
                              {"paths", paths.size()}};
  const std::string h = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, h.size());
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& p : paths) {
    for (double x : p.values) put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) throw NumericalError("path batch: write failed");
}

PathBatchFile read_path_batch(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ValidationError("path batch: bad magic");
  const std::uint64_t len = get_u64(in);
  if (len > (std::uint64_t{1} << 30)) throw ValidationError("path batch: header too large");
  std::string h(len, '\0');
  if (!in.read(h.data(), static_cast<std::streamsize>(len))) throw ValidationError("path batch: truncated header");
  PathBatchFile f;
  try {
    f.header = nlohmann::json::parse(h);
    f.paths = f.header.at("paths").get<std::size_t>();
    f.steps = f.header.at("steps").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("path batch: bad header: ") + e.what());
  }
  f.values.resize(f.paths * (f.steps + 1));
  for (double& x : f.values) x = std::bit_cast<double>(get_u64(in));
  return f;
}

PathOnGrid read_path_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open path file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("path file is empty");
  std::vector<double> t, x;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < 2) throw ValidationError("path file line " + std::to_string(lineno) + ": need t,X");
    try {
      t.push_back(parse_double(cells[0]));
      x.push_back(parse_double(cells[1]));
    } catch (const ValidationError& e) {
      throw ValidationError("path file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (x.size() < 2) throw ValidationError("path file needs at least two rows");
  const double dt = t[1] - t[0];
  if (!(dt > 0.0) || t[0] != 0.0) throw ValidationError("path file must start at t = 0 on an increasing grid");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs(t[k] - dt * static_cast<double>(k)) > 1e-9 * std::max(1.0, t[k])) {
      throw ValidationError("path file grid is not uniform at row " + std::to_string(k + 1));
    }
  }
  return PathOnGrid{x, dt, x.front()};
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

OutputDirectory::OutputDirectory(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path OutputDirectory::write(const std::string& name, const std::string& content) {
  const auto p = root_ / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + p.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return p;
}

std::filesystem::path OutputDirectory::write_manifest(const nlohmann::json& extra) {
  std::vector<std::string> names = files_;
  std::sort(names.begin(), names.end());
  nlohmann::json files = nlohmann::json::array();
  for (const auto& n : names) {
    const auto p = root_ / n;
    files.push_back({{"file", n}, {"bytes", std::filesystem::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  nlohmann::json m = extra;
  m["files"] = files;
  const auto p = root_ / "manifest.json";
  std::ofstream out(p);
  out << m.dump(2) << '\n';
  return p;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace vou
