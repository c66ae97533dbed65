#include "spnet/network_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spnet/error.hpp"

namespace spnet {

std::string format_double(double value, FloatFormat format) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format == FloatFormat::hex ? "%a" : "%.17g", value);
  return buf;
}

void write_network(std::ostream& out, const SpatialNetwork& net, FloatFormat format) {
  const int d = net.dimension();
  out << "spnet-network 1\n";
  out << "dimension " << d << '\n';
  out << "domain";
  for (int i = 0; i < d; ++i) out << ' ' << format_double(net.domain().lengths[i], format);
  out << '\n';
  out << "dirichlet_faces " << net.dirichlet_faces().size() << '\n';
  for (const auto& f : net.dirichlet_faces())
    out << f.axis << ' ' << (f.side == Side::low ? "low" : "high") << '\n';

  out << "nodes " << net.node_count() << '\n';
  std::string line;
  for (const auto& p : net.positions()) {
    line.clear();
    for (int i = 0; i < d; ++i) {
      if (i) line += ' ';
      line += format_double(p[i], format);
    }
    line += '\n';
    out << line;
  }

  out << "edges " << net.edge_count();
  if (net.has_weights()) out << " weight";
  if (net.has_fiber_ids()) out << " fiber";
  out << '\n';
  for (Index e = 0; e < net.edge_count(); ++e) {
    const auto& ed = net.edge(e);
    line = std::to_string(ed.a) + ' ' + std::to_string(ed.b);
    if (net.has_weights()) line += ' ' + format_double(net.weight(e), format);
    if (net.has_fiber_ids()) line += ' ' + std::to_string(net.fiber_id(e));
    line += '\n';
    out << line;
  }
  out << "end\n";
}

void write_network_file(const std::string& path, const SpatialNetwork& net, FloatFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_network(out, net, format);
  if (!out) throw Error("failed writing network to '" + path + "'");
}

namespace {

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line split into tokens.
  std::vector<std::string> next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      return tokens;
    }
    throw ConfigError(std::string("network file ended early, expected ") + what);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("network file line " + std::to_string(line_no_) + ": " + msg);
  }

  double number(const std::string& s) const {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail("'" + s + "' is not a number");
    return v;
  }

  long integer(const std::string& s) const {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail("'" + s + "' is not an integer");
    return v;
  }

  std::vector<std::string> keyed(const char* key, std::size_t min_tokens) {
    auto t = next(key);
    if (t.empty() || t[0] != key) fail(std::string("expected section '") + key + "'");
    if (t.size() < min_tokens) fail(std::string("section '") + key + "' is incomplete");
    return t;
  }

private:
  std::istream& in_;
  long line_no_ = 0;
};

} // namespace

NetworkData read_network_data(std::istream& in) {
  LineReader r(in);
  NetworkData data;

  auto header = r.next("header");
  if (header.size() != 2 || header[0] != "spnet-network") r.fail("missing 'spnet-network' header");
  if (header[1] != "1") r.fail("unsupported format version " + header[1]);

  const auto dim = r.keyed("dimension", 2);
  const int d = static_cast<int>(r.integer(dim[1]));
  if (d != 2 && d != 3) r.fail("dimension must be 2 or 3");
  data.domain.dimension = d;

  const auto dom = r.keyed("domain", 1 + static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) data.domain.lengths[i] = r.number(dom[1 + i]);

  const auto faces = r.keyed("dirichlet_faces", 2);
  const long nf = r.integer(faces[1]);
  for (long k = 0; k < nf; ++k) {
    const auto t = r.next("dirichlet face");
    if (t.size() != 2 || (t[1] != "low" && t[1] != "high")) r.fail("face must be '<axis> low|high'");
    data.dirichlet_faces.push_back({static_cast<int>(r.integer(t[0])), t[1] == "low" ? Side::low : Side::high});
  }

  const auto nodes = r.keyed("nodes", 2);
  const long n = r.integer(nodes[1]);
  if (n < 0) r.fail("negative node count");
  data.positions.resize(static_cast<std::size_t>(n));
  for (long x = 0; x < n; ++x) {
    const auto t = r.next("node coordinates");
    if (static_cast<int>(t.size()) != d) r.fail("node line needs " + std::to_string(d) + " coordinates");
    Point p{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) p[i] = r.number(t[i]);
    data.positions[static_cast<std::size_t>(x)] = p;
  }

  const auto edges = r.keyed("edges", 2);
  const long m = r.integer(edges[1]);
  bool has_weight = false, has_fiber = false;
  for (std::size_t k = 2; k < edges.size(); ++k) {
    if (edges[k] == "weight" && !has_fiber) has_weight = true;
    else if (edges[k] == "fiber") has_fiber = true;
    else r.fail("unknown edge column '" + edges[k] + "'");
  }
  const std::size_t cols = 2 + (has_weight ? 1 : 0) + (has_fiber ? 1 : 0);
  data.edges.resize(static_cast<std::size_t>(m));
  if (has_weight) data.weights.resize(static_cast<std::size_t>(m));
  if (has_fiber) data.fiber_ids.resize(static_cast<std::size_t>(m));
  for (long e = 0; e < m; ++e) {
    const auto t = r.next("edge");
    if (t.size() != cols) r.fail("edge line needs " + std::to_string(cols) + " columns");
    data.edges[e] = {static_cast<Index>(r.integer(t[0])), static_cast<Index>(r.integer(t[1]))};
    std::size_t c = 2;
    if (has_weight) data.weights[e] = r.number(t[c++]);
    if (has_fiber) data.fiber_ids[e] = static_cast<Index>(r.integer(t[c++]));
  }

  const auto end = r.next("end");
  if (end.size() != 1 || end[0] != "end") r.fail("expected 'end'");
  return data;
}

SpatialNetwork read_network(std::istream& in, SpatialNetwork::Connectivity policy) {
  return SpatialNetwork(read_network_data(in), policy);
}

SpatialNetwork read_network_file(const std::string& path, SpatialNetwork::Connectivity policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open network file '" + path + "'");
  return read_network(in, policy);
}

} // namespace spnet
