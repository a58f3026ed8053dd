#include "declqr/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "declqr/infograph.hpp"

namespace declqr {

Json matrix_to_json(const MatrixXd& M) {
  Json rows = Json::array();
  for (int r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j, int rows, int cols, const char* what) {
  if (j.is_string() && j.get<std::string>() == "identity") {
    if (rows != cols) throw std::invalid_argument(std::string(what) + ": identity must be square");
    return MatrixXd::Identity(rows, cols);
  }
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) +
                                " rows");
  }
  MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) {
      throw std::invalid_argument(std::string(what) + ": row " + std::to_string(r + 1) +
                                  " must have " + std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

Json system_to_json(const NetworkedSystem& system, const CostSpec& cost) {
  Json edges = Json::array();
  for (const Edge& e : system.graph.edges()) edges.push_back({e.from + 1, e.to + 1, e.delay});
  Json j;
  j["p"] = system.layout.nodes();
  j["edges"] = edges;
  j["state_dims"] = system.layout.state_dims();
  j["input_dims"] = system.layout.input_dims();
  j["A"] = matrix_to_json(system.A);
  j["B"] = matrix_to_json(system.B);
  j["sigma_w"] = system.sigma_w;
  const auto dense_or_identity = [](const MatrixXd& M) {
    return M.isIdentity(0.0) ? Json("identity") : matrix_to_json(M);
  };
  j["Q"] = dense_or_identity(cost.Q);
  j["R"] = dense_or_identity(cost.R);
  return j;
}

NetworkedSystem system_from_json(const Json& j) {
  try {
    const int p = j.at("p").get<int>();
    std::vector<Edge> edges;
    for (const Json& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) {
        throw std::invalid_argument("edges must be [from, to, delay] triples");
      }
      edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1, e[2].get<int>()});
    }
    const auto dims = [&](const char* key) {
      if (!j.contains(key)) return std::vector<int>(p, 1);
      auto v = j.at(key).get<std::vector<int>>();
      if (static_cast<int>(v.size()) != p) {
        throw std::invalid_argument(std::string(key) + " must have p entries");
      }
      return v;
    };
    BlockLayout layout(dims("state_dims"), dims("input_dims"));
    MatrixXd A = matrix_from_json(j.at("A"), layout.n(), layout.n(), "A");
    MatrixXd B = matrix_from_json(j.at("B"), layout.n(), layout.m(), "B");
    return NetworkedSystem(CommGraph(p, std::move(edges)), std::move(layout), std::move(A),
                           std::move(B), j.value("sigma_w", 1.0));
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("system file: ") + e.what());
  }
}

CostSpec cost_from_json(const Json& j, const BlockLayout& layout) {
  CostSpec c;
  c.Q = j.contains("Q") ? matrix_from_json(j["Q"], layout.n(), layout.n(), "Q")
                        : MatrixXd::Identity(layout.n(), layout.n());
  c.R = j.contains("R") ? matrix_from_json(j["R"], layout.m(), layout.m(), "R")
                        : MatrixXd::Identity(layout.m(), layout.m());
  return c;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  const int n = trace.x.empty() ? 0 : static_cast<int>(trace.x.front().size());
  const int m = trace.u.empty() ? 0 : static_cast<int>(trace.u.front().size());
  os << "t,phase,fallback,cost";
  for (int k = 0; k < n; ++k) os << ",x" << k + 1;
  for (int k = 0; k < m; ++k) os << ",u" << k + 1;
  os << '\n';
  for (int t = 0; t < trace.steps(); ++t) {
    os << t << ',' << phase_name(trace.phase[t]) << ',' << trace.fallback[t] << ','
       << format_double(trace.cost[t]);
    for (int k = 0; k < n; ++k) os << ',' << format_double(trace.x[t](k));
    for (int k = 0; k < m; ++k) os << ',' << format_double(trace.u[t](k));
    os << '\n';
  }
  const int last = trace.steps();
  os << last << ",final,,";
  for (int k = 0; k < n; ++k) os << ',' << format_double(trace.x[last](k));
  for (int k = 0; k < m; ++k) os << ',';
  os << '\n';
}

Json trace_sidecar(const RunTrace& trace) {
  const LearnerConfig& c = trace.config;
  Json j;
  j["config"] = {{"N", c.N},          {"T", c.T},           {"h", c.h},
                 {"lambda", c.lambda}, {"sigma_u", c.sigma_u}, {"R_x", c.R_x},
                 {"R_u", c.R_u},       {"vartheta", c.vartheta}, {"alpha", c.alpha},
                 {"radius", c.radius}};
  j["D_max"] = trace.D_max;
  j["estimate"] = {{"A_hat", matrix_to_json(trace.estimate.A_hat)},
                   {"B_hat", matrix_to_json(trace.estimate.B_hat)},
                   {"lambda", trace.estimate.lambda},
                   {"N", trace.estimate.N}};
  j["estimate_discarded"] = trace.estimate_discarded;
  j["phi_error"] = trace.phi_error;
  return j;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Phase parse_phase(const std::string& s) {
  if (s == "exploration") return Phase::Exploration;
  if (s == "warmup") return Phase::Warmup;
  if (s == "control") return Phase::Control;
  throw std::invalid_argument("trace: unknown phase '" + s + "'");
}

}  // namespace

RunTrace read_trace(std::istream& csv, const Json& sidecar) {
  RunTrace tr;
  try {
    const Json& c = sidecar.at("config");
    tr.config.N = c.at("N");
    tr.config.T = c.at("T");
    tr.config.h = c.at("h");
    tr.config.lambda = c.at("lambda");
    tr.config.sigma_u = c.at("sigma_u");
    tr.config.R_x = c.at("R_x");
    tr.config.R_u = c.at("R_u");
    tr.config.vartheta = c.at("vartheta");
    tr.config.alpha = c.at("alpha");
    tr.config.radius = c.at("radius");
    tr.D_max = sidecar.at("D_max");
    const Json& e = sidecar.at("estimate");
    const Json& Ah = e.at("A_hat");
    const Json& Bh = e.at("B_hat");
    const int n = static_cast<int>(Ah.size());
    const int m = n == 0 ? 0 : static_cast<int>(Bh.at(0).size());
    tr.estimate.A_hat = matrix_from_json(Ah, n, n, "A_hat");
    tr.estimate.B_hat = matrix_from_json(Bh, n, m, "B_hat");
    tr.estimate.lambda = e.at("lambda");
    tr.estimate.N = e.at("N");
    tr.estimate_discarded = sidecar.value("estimate_discarded", false);
    tr.phi_error = sidecar.value("phi_error", 0.0);

    std::string line;
    if (!std::getline(csv, line)) throw std::invalid_argument("trace: empty file");
    const auto header = split_csv_line(line);
    if (static_cast<int>(header.size()) != 4 + n + m) {
      throw std::invalid_argument("trace: header does not match the estimate's dimensions");
    }
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (static_cast<int>(f.size()) != 4 + n + m) {
        throw std::invalid_argument("trace: malformed row '" + line + "'");
      }
      VectorXd x(n);
      for (int k = 0; k < n; ++k) x(k) = std::stod(f[4 + k]);
      tr.x.push_back(std::move(x));
      if (f[1] == "final") break;
      tr.phase.push_back(parse_phase(f[1]));
      tr.fallback.push_back(std::stoull(f[2]));
      tr.cost.push_back(std::stod(f[3]));
      VectorXd u(m);
      for (int k = 0; k < m; ++k) u(k) = std::stod(f[4 + n + k]);
      tr.u.push_back(std::move(u));
    }
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("trace sidecar: ") + e.what());
  }
  if (tr.x.size() != tr.u.size() + 1) throw std::invalid_argument("trace: missing final state");
  return tr;
}

std::string format_params(const DfcParams& M, const InfoGraph& ig) {
  std::ostringstream os;
  os.precision(17);
  for (int s = 0; s < M.num_nodes(); ++s) {
    for (int k = 1; k <= M.h(); ++k) {
      os << "M " << format_node(ig.nodes[s]) << " [" << k << "]\n" << M.block(s, k) << "\n\n";
    }
  }
  return os.str();
}

}  // namespace declqr
