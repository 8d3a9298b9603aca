#include "oqmap/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unistd.h>

namespace oqmap {

static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");

std::string format_double(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix JSON must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw std::invalid_argument("ragged matrix JSON");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = j[r][c];
      m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

namespace {
constexpr char kMagic[8] = {'O', 'Q', 'M', 'A', 'P', '1', '\0', '\0'};

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}
}  // namespace

std::string matrix_to_binary(const Matrix& m) {
  if (m.rows() > 0xffffffffLL || m.cols() > 0xffffffffLL) throw std::invalid_argument("matrix too large for header");
  std::string out;
  out.reserve(16 + static_cast<std::size_t>(m.size()) * 16);
  out.append(kMagic, 8);
  put(out, static_cast<std::uint32_t>(m.rows()));
  put(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put(out, m(i, j).real());
      put(out, m(i, j).imag());
    }
  }
  return out;
}

Matrix matrix_from_binary(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw std::invalid_argument("not an OQMAP1 matrix file");
  }
  std::uint32_t rows = 0, cols = 0;
  std::memcpy(&rows, bytes.data() + 8, 4);
  std::memcpy(&cols, bytes.data() + 12, 4);
  const std::size_t need = 16 + std::size_t{rows} * cols * 16;
  if (bytes.size() != need) throw std::invalid_argument("OQMAP1 payload size mismatch");
  Matrix m(rows, cols);
  const char* p = bytes.data() + 16;
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      double re = 0, im = 0;
      std::memcpy(&re, p, 8);
      std::memcpy(&im, p + 8, 8);
      p += 16;
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

nlohmann::json builder_to_json(const BuilderInfo& b) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : b.params) params[k] = v;
  return {{"kind", b.kind}, {"params", params}};
}

void RunManifest::add_output(const std::filesystem::path& path, std::string_view content) {
  digests[path.filename().string()] = {{"sha256", sha256_hex(content)}, {"bytes", content.size()}};
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},         {"parameters", parameters}, {"tolerances", tolerances},
          {"tool_version", tool_version()}, {"timestamp", timestamp},   {"timings", timings},
          {"results", results},         {"output_digests", digests}};
}

std::string tool_version() { return "oqmap 0.1.0"; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace oqmap
