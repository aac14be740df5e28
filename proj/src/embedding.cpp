#include "request/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "request/error.hpp"

namespace request {

double Matrix::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void EmbeddingStore::init_uniform(Rng& rng) {
  const double half = 0.5 / static_cast<double>(dim);
  for (Matrix* m : {&Z, &P, &C, &R})
    for (double& v : m->data()) v = (2.0 * uniform01(rng) - 1.0) * half;
}

bool EmbeddingStore::all_finite() const {
  return Z.all_finite() && P.all_finite() && C.all_finite() && R.all_finite();
}

std::string serialize_model(const EmbeddingStore& s) {
  std::string out = "REQUEST-EMB 1 " + std::to_string(s.dim) + " " + std::to_string(s.Z.rows()) +
                    " " + std::to_string(s.P.rows()) + " " + std::to_string(s.C.rows()) + " " +
                    std::to_string(s.R.rows()) + "\n";
  char buf[64];
  auto section = [&](const char* name, const Matrix& m) {
    out += name;
    out += '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out += std::to_string(i);
      for (double v : m.row(i)) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out += ' ';
        out.append(buf, end);
      }
      out += '\n';
    }
  };
  section("#Z", s.Z);
  section("#P", s.P);
  section("#C", s.C);
  section("#R", s.R);
  return out;
}

void save_model(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << serialize_model(store);
}

EmbeddingStore parse_model(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty model file");
  std::istringstream hs(line);
  std::string magic;
  int version = 0;
  std::size_t d = 0, nz = 0, np = 0, m = 0, k = 0;
  if (!(hs >> magic >> version >> d >> nz >> np >> m >> k) || magic != "REQUEST-EMB" ||
      version != 1 || d == 0)
    throw ParseError(source, 1, "bad model header");
  EmbeddingStore s(d, nz, np, m, k);
  for (auto [name, mat] : {std::pair{"#Z", &s.Z}, {"#P", &s.P}, {"#C", &s.C}, {"#R", &s.R}}) {
    ++line_no;
    if (!std::getline(in, line) || line != name)
      throw ParseError(source, line_no, std::string("expected section ") + name);
    for (std::size_t i = 0; i < mat->rows(); ++i) {
      ++line_no;
      if (!std::getline(in, line)) throw ParseError(source, line_no, "truncated section");
      const char* p = line.data();
      const char* end = p + line.size();
      std::size_t id = 0;
      auto r = std::from_chars(p, end, id);
      if (r.ec != std::errc() || id != i) throw ParseError(source, line_no, "bad row id");
      p = r.ptr;
      for (double& v : mat->row(i)) {
        if (p == end || *p != ' ') throw ParseError(source, line_no, "too few values");
        ++p;
        r = std::from_chars(p, end, v);
        if (r.ec != std::errc()) throw ParseError(source, line_no, "bad value");
        p = r.ptr;
      }
      if (p != end) throw ParseError(source, line_no, "too many values");
    }
  }
  return s;
}

EmbeddingStore load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path.string());
}

}  // namespace request
