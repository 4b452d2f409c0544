#include "adjqoc/workbench/system_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace adjqoc::workbench {

using nlohmann::json;

namespace {

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex parse_complex(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(std::string(what) + ": expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix parse_matrix(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(n) + " rows");
  }
  CMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw std::invalid_argument(std::string(what) + ": ragged row");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = parse_complex(row[static_cast<std::size_t>(c)], what);
    }
  }
  return m;
}

json vector_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

CVector parse_vector(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(n) + " entries");
  }
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = parse_complex(j[static_cast<std::size_t>(i)], what);
  }
  return v;
}

void check_matrix(const CMatrix& m, Eigen::Index n, const std::string& what) {
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument(what + ": wrong shape");
  }
  if (!m.allFinite()) throw std::invalid_argument(what + ": non-finite entry");
  const double res = HermitianMatrix::hermiticity_residual(m);
  if (!(res <= kHermitianTol)) {
    std::ostringstream os;
    os << what << ": not Hermitian (residual " << res << ")";
    throw std::invalid_argument(os.str());
  }
}

void check_unit(const CVector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw std::invalid_argument(std::string(what) + ": wrong length");
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  if (std::abs(v.norm() - 1.0) > kNormTol) {
    throw std::invalid_argument(std::string(what) + ": not unit norm");
  }
}

}  // namespace

void SystemFile::validate() const {
  if (format_version != kSystemFormatVersion) {
    throw std::invalid_argument("system file: unsupported format_version " +
                                std::to_string(format_version));
  }
  if (dim < 1) throw std::invalid_argument("system file: dim must be >= 1");
  if (num_channels < 1 || num_channels > 3) {
    throw std::invalid_argument("system file: num_channels must be 1, 2 or 3");
  }
  if (static_cast<int>(dipoles.size()) != num_channels) {
    throw std::invalid_argument("system file: dipole count differs from num_channels");
  }
  check_matrix(h0, dim, "h0");
  for (std::size_t k = 0; k < dipoles.size(); ++k) {
    check_matrix(dipoles[k], dim, "dipoles[" + std::to_string(k) + "]");
  }
  check_unit(alpha, dim, "alpha");
  check_unit(beta, dim, "beta");
}

bool SystemFile::operator==(const SystemFile& o) const {
  if (format_version != o.format_version || name != o.name || dim != o.dim ||
      num_channels != o.num_channels || dipoles.size() != o.dipoles.size()) {
    return false;
  }
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  for (std::size_t k = 0; k < dipoles.size(); ++k) {
    if (!same(dipoles[k], o.dipoles[k])) return false;
  }
  return same(h0, o.h0) && same(alpha, o.alpha) && same(beta, o.beta);
}

std::string dump_system(const SystemFile& sys) {
  json j;
  j["format_version"] = sys.format_version;
  j["name"] = sys.name;
  j["dim"] = sys.dim;
  j["num_channels"] = sys.num_channels;
  j["h0"] = matrix_json(sys.h0);
  json dip = json::array();
  for (const CMatrix& m : sys.dipoles) dip.push_back(matrix_json(m));
  j["dipoles"] = std::move(dip);
  j["alpha"] = vector_json(sys.alpha);
  j["beta"] = vector_json(sys.beta);
  return j.dump(1) + "\n";
}

SystemFile parse_system(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("system file: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("system file: expected an object");
  for (const char* key : {"format_version", "name", "dim", "num_channels", "h0",
                          "dipoles", "alpha", "beta"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("system file: missing '") + key + "'");
    }
  }
  SystemFile s;
  try {
    s.format_version = j.at("format_version").get<int>();
    if (s.format_version != kSystemFormatVersion) s.validate();
    s.name = j.at("name").get<std::string>();
    s.dim = j.at("dim").get<Eigen::Index>();
    s.num_channels = j.at("num_channels").get<int>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("system file: ") + e.what());
  }
  if (s.dim < 1) throw std::invalid_argument("system file: dim must be >= 1");
  s.h0 = parse_matrix(j.at("h0"), s.dim, "h0");
  const json& dip = j.at("dipoles");
  if (!dip.is_array()) throw std::invalid_argument("dipoles: expected an array");
  for (const json& m : dip) s.dipoles.push_back(parse_matrix(m, s.dim, "dipoles"));
  s.alpha = parse_vector(j.at("alpha"), s.dim, "alpha");
  s.beta = parse_vector(j.at("beta"), s.dim, "beta");
  s.validate();
  return s;
}

void save_system(const SystemFile& sys, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << dump_system(sys);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SystemFile load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

QuantumSystem to_quantum_system(const SystemFile& file, double rho,
                                std::size_t steps, double dt) {
  file.validate();
  // Channels whose dipole is identically zero carry no coupling and are
  // dropped; an all-zero file keeps its first channel so K stays >= 1.
  std::vector<HermitianMatrix> dipoles;
  for (const CMatrix& m : file.dipoles) {
    if (!m.isZero(0.0)) dipoles.emplace_back(m);
  }
  if (dipoles.empty()) dipoles.emplace_back(file.dipoles.front());
  return make_system(HermitianMatrix(file.h0), std::move(dipoles), file.alpha,
                     file.beta, rho, steps, dt);
}

}  // namespace adjqoc::workbench
