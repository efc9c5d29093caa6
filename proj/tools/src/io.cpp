#include "io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "jnr/errors.hpp"
#include "jnr/qops.hpp"

namespace jnrcli {

using jnr::CMatrix;
using jnr::ObservableTriple;
using jnr::ParseError;
using jnr::PointCloud3;
using jnr::Vec3;

double report_round(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

ordered_json vec_json(const Vec3& v) {
  return ordered_json::array(
      {report_round(v.x), report_round(v.y), report_round(v.z)});
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical_triple_text(const ObservableTriple& tr) {
  std::string s;
  for (int i = 0; i < 3; ++i) {
    s += "H";
    s += static_cast<char>('1' + i);
    s += '\n';
    const CMatrix& m = tr[i].m;
    for (int r = 0; r < m.order(); ++r) {
      for (int c = 0; c < m.order(); ++c) {
        if (c) s += ' ';
        s += format17(m(r, c).real());
        s += ' ';
        s += format17(m(r, c).imag());
      }
      s += '\n';
    }
  }
  return s;
}

static std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string instance_hash(const ObservableTriple& tr) {
  return fnv1a64(canonical_triple_text(tr));
}

std::string bytes_hash(const std::string& bytes) { return fnv1a64(bytes); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

int line_of_offset(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

int pauli_index(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    case 'Z': return 3;
    default: return -1;
  }
}

CMatrix dense_matrix(const ordered_json& j, const std::string& field) {
  const auto need_grid = [&](const ordered_json& g, const std::string& part) {
    if (!g.is_array() || g.size() != 4)
      throw ParseError(field + "." + part + ": expected 4 rows, got " +
                       std::to_string(g.is_array() ? g.size() : 0));
    for (size_t r = 0; r < 4; ++r) {
      if (!g[r].is_array() || g[r].size() != 4)
        throw ParseError(field + "." + part + ": row " + std::to_string(r) +
                         " must hold 4 numbers");
      for (size_t c = 0; c < 4; ++c)
        if (!g[r][c].is_number())
          throw ParseError(field + "." + part + ": row " + std::to_string(r) +
                           " column " + std::to_string(c) + " is not a number");
    }
  };
  need_grid(j.at("re"), "re");
  const bool has_im = j.contains("im");
  if (has_im) need_grid(j.at("im"), "im");
  CMatrix m(4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      m(r, c) = {j["re"][r][c].get<double>(),
                 has_im ? j["im"][r][c].get<double>() : 0.0};
  return m;
}

CMatrix pauli_matrix(const ordered_json& j, const std::string& field) {
  jnr::PauliCoeffs16 coeffs;
  for (const auto& [key, value] : j.items()) {
    if (key.size() != 2 || pauli_index(key[0]) < 0 || pauli_index(key[1]) < 0)
      throw ParseError(field + "." + key +
                       ": keys must be two-letter Pauli words over I,X,Y,Z");
    if (!value.is_number())
      throw ParseError(field + "." + key + ": coefficient is not a number");
    coeffs.c[pauli_index(key[0])][pauli_index(key[1])] = value.get<double>();
  }
  return jnr::pauli_compose(coeffs);
}

} // namespace

jnr::InstanceSpec load_instance_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + " line " +
                     std::to_string(line_of_offset(text, e.byte)) + ": " +
                     e.what());
  }
  if (!doc.is_object())
    throw ParseError(path.string() + ": top level must be an object");

  jnr::InstanceSpec spec;
  spec.name = doc.value("name", path.stem().string());

  std::array<CMatrix, 3> mats;
  for (int i = 0; i < 3; ++i) {
    const std::string field = "h" + std::to_string(i + 1);
    if (!doc.contains(field))
      throw ParseError(path.string() + ": missing member " + field);
    const ordered_json& entry = doc[field];
    if (!entry.is_object())
      throw ParseError(field + ": must be a dense {re, im} object or a "
                       "Pauli-coefficient map");
    mats[i] = entry.contains("re") ? dense_matrix(entry, field)
                                   : pauli_matrix(entry, field);
  }
  for (int i = 0; i < 3; ++i) {
    try {
      spec.triple[i] = jnr::validate_hermitian(mats[i]);
    } catch (const jnr::NotHermitianError& e) {
      throw jnr::NotHermitianError("h" + std::to_string(i + 1) + ": " +
                                   e.what());
    }
  }
  return spec;
}

void write_cloud_csv(const std::filesystem::path& path,
                     const PointCloud3& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "# range: " << jnr::range_kind_name(cloud.tag) << "\n";
  const bool prov = cloud.has_provenance();
  out << (prov ? "x,y,z,alpha_x,alpha_y,alpha_z,beta_x,beta_y,beta_z"
               : "x,y,z")
      << "\n";
  for (int i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.pts[static_cast<size_t>(i)];
    out << format17(p.x) << ',' << format17(p.y) << ',' << format17(p.z);
    if (prov) {
      const jnr::Provenance& pr = cloud.prov[static_cast<size_t>(i)];
      out << ',' << format17(pr.alpha.x) << ',' << format17(pr.alpha.y) << ','
          << format17(pr.alpha.z) << ',' << format17(pr.beta.x) << ','
          << format17(pr.beta.y) << ',' << format17(pr.beta.z);
    }
    out << '\n';
  }
}

PointCloud3 read_cloud_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  PointCloud3 cloud;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# range: ";
      if (line.rfind(tag, 0) == 0) {
        const std::string kind = line.substr(tag.size());
        for (jnr::RangeKind k :
             {jnr::RangeKind::Lambda, jnr::RangeKind::Pi, jnr::RangeKind::Theta,
              jnr::RangeKind::PiPlus, jnr::RangeKind::ThetaPlus,
              jnr::RangeKind::LambdaR})
          if (kind == jnr::range_kind_name(k)) cloud.tag = k;
      }
      continue;
    }
    if (cols < 0) {
      // Header row. Anything starting with x,y,z is accepted; provenance
      // columns are optional.
      if (line.rfind("x,y,z", 0) != 0)
        throw ParseError(path.string() + " line " + std::to_string(line_no) +
                         ": header must start with x,y,z");
      cols = 1;
      for (char c : line)
        if (c == ',') ++cols;
      if (cols != 3 && cols != 9)
        throw ParseError(path.string() + " line " + std::to_string(line_no) +
                         ": expected 3 or 9 columns, got " +
                         std::to_string(cols));
      continue;
    }
    double v[9] = {0};
    const char* s = line.c_str();
    for (int k = 0; k < cols; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(s, &end);
      if (end == s)
        throw ParseError(path.string() + " line " + std::to_string(line_no) +
                         ": bad numeric field " + std::to_string(k + 1));
      s = end;
      if (k + 1 < cols) {
        if (*s != ',')
          throw ParseError(path.string() + " line " + std::to_string(line_no) +
                           ": expected ',' after field " +
                           std::to_string(k + 1));
        ++s;
      }
    }
    if (cols == 9)
      cloud.push({v[0], v[1], v[2]},
                 jnr::Provenance{{v[3], v[4], v[5]}, {v[6], v[7], v[8]}});
    else
      cloud.push({v[0], v[1], v[2]});
  }
  if (cols < 0)
    throw ParseError(path.string() + ": no header row");
  if (cloud.empty())
    throw ParseError(path.string() + ": no data rows");
  return cloud;
}

void write_hull_obj(const std::filesystem::path& path,
                    const jnr::ConvexPolytope3& hull) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "# convex hull: " << hull.vertices.size() << " vertices, "
      << hull.facets.size() << " facets, affine rank " << hull.affine_rank
      << "\n";
  for (const Vec3& v : hull.vertices)
    out << "v " << format17(v.x) << ' ' << format17(v.y) << ' '
        << format17(v.z) << '\n';
  if (!hull.facets.empty()) {
    for (const jnr::Facet& f : hull.facets) {
      out << 'f';
      for (int id : f.vertex_ids) out << ' ' << id + 1;
      out << '\n';
    }
  } else {
    for (const auto& t : hull.triangles)
      out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

void write_json_file(const std::filesystem::path& path,
                     const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

} // namespace jnrcli
