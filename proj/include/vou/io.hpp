#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "vou/estimators.hpp"
#include "vou/harness.hpp"
#include "vou/kernel.hpp"
#include "vou/second_kind.hpp"
#include "vou/simulator.hpp"

namespace vou {

// RFC 4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(const std::string& s);
// 17 significant digits, '.' separator; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double x);
std::string csv_value(const nlohmann::json& v);
double parse_double(const std::string& s);

std::string report_csv(const ExperimentReport& report);

// Columns t, X (and xi when the noise was retained).
std::string path_csv(const SamplePath& path);
// Columns t, E_beta.
std::string resolvent_csv(const SecondKindResolvent& resolvent);
// Columns method, T, n, m, b_hat, beta_hat, f_denominator, seed.
std::string estimate_csv_header();
std::string estimate_csv_row(const DriftEstimate& e, std::uint64_t seed);

// Binary batch: magic "VOUPATH1", u64 header length, JSON header {kernel, params, seed, seed_rule,
// scheme, grid_step, steps, paths}, then paths * (steps + 1) little-endian doubles, row-major.
struct PathBatchFile {
  nlohmann::json header;
  std::size_t paths = 0;
  std::size_t steps = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t path, std::size_t k) const { return values[path * (steps + 1) + k]; }
};

void write_path_batch(std::ostream& out, const KernelSpec& kernel, const VouParams& params, std::uint64_t seed,
                      const std::vector<SamplePath>& paths);
PathBatchFile read_path_batch(std::istream& in);

// Reads a path from CSV with columns t, X (header row required); x0 is the first value.
PathOnGrid read_path_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Writes files and keeps a manifest of their hashes.
class OutputDirectory {
 public:
  explicit OutputDirectory(std::filesystem::path root);
  std::filesystem::path write(const std::string& name, const std::string& content);
  // manifest.json: files sorted by name with size and sha256.
  std::filesystem::path write_manifest(const nlohmann::json& extra = nlohmann::json::object());
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

std::string dump_json(const nlohmann::json& j);

}  // namespace vou
