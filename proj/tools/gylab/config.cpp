#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gylab/errors.hpp"

namespace gylab::cli {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kProblemKeys{
    "hamiltonian", "dimension", "mass",        "horizon",     "omega", "lambda",
    "gamma",       "delta",     "stiffness",   "seed",        "f1_a",  "f2_a",
    "f1_coupling", "f2_coupling", "b1",        "b2"};
const std::set<std::string> kNumericsKeys{
    "N",       "N_list", "newton_tol",  "max_iter",     "h_ode",   "ode_steps", "shoot_tol",
    "fd_step", "which",  "cross_method", "eigen_count", "fd_intervals", "mu_list", "weak_N_list"};
const std::set<std::string> kOutputKeys{"prefix", "continuum", "timestamp"};

// Keys each Hamiltonian kind accepts beyond the common ones.
const std::map<std::string, std::set<std::string>> kKindKeys{
    {"free", {}},
    {"harmonic", {"omega"}},
    {"quadratic", {"stiffness"}},
    {"anharmonic", {"omega", "lambda"}},
    {"coupled", {"omega", "gamma", "delta"}},
    {"random_quadratic", {"seed"}},
};
const std::set<std::string> kCommonProblemKeys{"hamiltonian", "dimension", "mass", "horizon",
                                               "f1_a", "f2_a", "f1_coupling", "f2_coupling",
                                               "b1", "b2"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_factor(const std::string& token, const std::string& whole) {
  const std::string t = trim(token);
  if (t == "pi") return std::numbers::pi;
  double v = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse number '" + whole + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

long long parse_integer(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  long long v = 0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  try {
    for (const auto& tok : split_list(text)) out.push_back(parse_real(tok));
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
  return out;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& key) {
  std::vector<Index> out;
  for (const auto& tok : split_list(text)) out.push_back(static_cast<Index>(parse_integer(tok, key)));
  return out;
}

double real_key(const std::string& text, const std::string& key) {
  try {
    return parse_real(text);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

Matrix square_from(const std::vector<double>& v, Index n, double fallback, const std::string& key) {
  if (v.empty()) return fallback * Matrix::Identity(n, n);
  if (v.size() == 1) return v[0] * Matrix::Identity(n, n);
  const auto nn = static_cast<std::size_t>(n);
  if (v.size() == nn) return Eigen::Map<const Vector>(v.data(), n).asDiagonal();
  if (v.size() == nn * nn) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
    }
    return m;
  }
  throw ConfigError(key + ": expected 1, n or n*n values");
}

Vector vector_from(const std::vector<double>& v, Index n, const std::string& key) {
  if (v.empty()) return Vector::Zero(n);
  if (v.size() == 1) return Vector::Constant(n, v[0]);
  if (v.size() == static_cast<std::size_t>(n)) return Eigen::Map<const Vector>(v.data(), n);
  throw ConfigError(key + ": expected 1 or n values");
}

void check_symmetric(const Matrix& m, const std::string& key) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ConfigError(key + ": matrix must be symmetric");
  }
}

}  // namespace

double parse_real(const std::string& text) {
  // Product of factors joined by '*' and '/', each a number or "pi".
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty number");
  double value = 1.0;
  char op = '*';
  std::string token;
  auto apply = [&] {
    const double f = parse_factor(token, t);
    value = op == '*' ? value * f : value / f;
    token.clear();
  };
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char c = t[i];
    const bool exponent_sign = (c == '-' || c == '+') && i > 0 && (t[i - 1] == 'e' || t[i - 1] == 'E');
    if ((c == '*' || c == '/') && !exponent_sign) {
      apply();
      op = c;
    } else {
      token += c;
    }
  }
  apply();
  if (!std::isfinite(value)) throw ConfigError("non-finite number '" + t + "'");
  return value;
}

const std::vector<std::string>& verify_identities() {
  static const std::vector<std::string> ids{"gy-discrete", "gy-an",    "gy-zeta",   "thm23",
                                            "lemma22",     "weak-conv", "spectral", "asymptotic",
                                            "lattice-gy"};
  return ids;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }

  RunConfig cfg;
  const std::map<std::string, const std::set<std::string>*> sections{
      {"problem", &kProblemKeys}, {"numerics", &kNumericsKeys}, {"output", &kOutputKeys}};
  for (const auto& [name, node] : tree) {
    const auto it = sections.find(name);
    if (node.empty() && !node.data().empty()) {
      throw ConfigError("key '" + name + "' outside of a section");
    }
    if (it == sections.end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : node) {
      if (!value.empty()) throw ConfigError("nested key " + name + "." + key);
      if (!it->second->count(key)) throw ConfigError("unknown key " + name + "." + key);
      cfg.raw[name][key] = trim(value.data());
    }
  }

  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto s = cfg.raw.find(section);
    if (s == cfg.raw.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  };

  ProblemConfig& p = cfg.problem;
  if (auto v = get("problem", "hamiltonian")) p.hamiltonian = *v;
  const auto kind = kKindKeys.find(p.hamiltonian);
  if (kind == kKindKeys.end()) {
    throw ConfigError("problem.hamiltonian: unknown kind '" + p.hamiltonian +
                      "' (free, harmonic, quadratic, anharmonic, coupled, random_quadratic)");
  }
  for (const auto& [key, value] : cfg.raw["problem"]) {
    (void)value;
    if (!kCommonProblemKeys.count(key) && !kind->second.count(key)) {
      throw ConfigError("problem." + key + " does not apply to hamiltonian = " + p.hamiltonian);
    }
    if (p.hamiltonian == "random_quadratic" && key != "hamiltonian" && key != "dimension" &&
        key != "mass" && key != "horizon" && key != "seed") {
      throw ConfigError("problem." + key + " is generated by random_quadratic and cannot be set");
    }
  }
  if (auto v = get("problem", "dimension")) {
    const long long d = parse_integer(*v, "problem.dimension");
    if (d < 1 || d > 64) throw ConfigError("problem.dimension must be in [1, 64]");
    p.dimension = static_cast<Index>(d);
  }
  if (auto v = get("problem", "mass")) p.mass = real_key(*v, "problem.mass");
  if (auto v = get("problem", "horizon")) p.horizon = real_key(*v, "problem.horizon");
  if (auto v = get("problem", "omega")) p.omega = real_key(*v, "problem.omega");
  if (auto v = get("problem", "lambda")) p.lambda = real_key(*v, "problem.lambda");
  if (auto v = get("problem", "gamma")) p.gamma = real_key(*v, "problem.gamma");
  if (auto v = get("problem", "delta")) p.delta = real_key(*v, "problem.delta");
  if (auto v = get("problem", "stiffness")) p.stiffness = parse_real_list(*v, "problem.stiffness");
  if (auto v = get("problem", "seed")) {
    const long long s = parse_integer(*v, "problem.seed");
    if (s < 0) throw ConfigError("problem.seed must be nonnegative");
    p.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("problem", "f1_a")) p.f1_a = parse_real_list(*v, "problem.f1_a");
  if (auto v = get("problem", "f2_a")) p.f2_a = parse_real_list(*v, "problem.f2_a");
  if (auto v = get("problem", "f1_coupling")) p.f1_coupling = parse_real_list(*v, "problem.f1_coupling");
  if (auto v = get("problem", "f2_coupling")) p.f2_coupling = parse_real_list(*v, "problem.f2_coupling");
  if (auto v = get("problem", "b1")) p.b1 = parse_real_list(*v, "problem.b1");
  if (auto v = get("problem", "b2")) p.b2 = parse_real_list(*v, "problem.b2");
  if (!(p.mass > 0.0)) throw ConfigError("problem.mass must be positive");
  if (!(p.horizon > 0.0)) throw ConfigError("problem.horizon must be positive");

  NumericsConfig& n = cfg.numerics;
  if (auto v = get("numerics", "N")) {
    const long long pts = parse_integer(*v, "numerics.N");
    if (pts < 3) throw ConfigError("numerics.N must be at least 3");
    n.points = static_cast<Index>(pts);
  }
  if (auto v = get("numerics", "N_list")) {
    n.n_list = parse_index_list(*v, "numerics.N_list");
    n.n_list_given = true;
    if (n.n_list.empty()) throw ConfigError("numerics.N_list is empty");
    for (std::size_t i = 0; i < n.n_list.size(); ++i) {
      if (n.n_list[i] < 3 || n.n_list[i] % 2 == 0) {
        throw ConfigError("numerics.N_list entries must be odd and at least 3");
      }
      if (i > 0 && n.n_list[i] <= n.n_list[i - 1]) {
        throw ConfigError("numerics.N_list must be increasing");
      }
    }
    if (n.n_list.size() < 4) throw ConfigError("numerics.N_list needs at least four entries");
  }
  if (auto v = get("numerics", "newton_tol")) {
    n.newton.tol = real_key(*v, "numerics.newton_tol");
    if (!(n.newton.tol > 0.0)) throw ConfigError("numerics.newton_tol must be positive");
  }
  if (auto v = get("numerics", "max_iter")) {
    const long long it = parse_integer(*v, "numerics.max_iter");
    if (it < 1 || it > 10000) throw ConfigError("numerics.max_iter must be in [1, 10000]");
    n.newton.max_iter = static_cast<int>(it);
    n.shoot.max_iter = static_cast<int>(it);
  }
  if (get("numerics", "h_ode") && get("numerics", "ode_steps")) {
    throw ConfigError("numerics.h_ode and numerics.ode_steps are mutually exclusive");
  }
  if (auto v = get("numerics", "h_ode")) {
    const double h = real_key(*v, "numerics.h_ode");
    if (!(h > 0.0) || h > p.horizon) throw ConfigError("numerics.h_ode must be in (0, T]");
    long long steps = std::llround(p.horizon / h);
    steps += steps % 2;
    if (steps > 100000000) throw ConfigError("numerics.h_ode is too small");
    n.shoot.steps = static_cast<int>(std::max(2LL, steps));
  }
  if (auto v = get("numerics", "ode_steps")) {
    const long long s = parse_integer(*v, "numerics.ode_steps");
    if (s < 2 || s % 2 != 0 || s > 100000000) {
      throw ConfigError("numerics.ode_steps must be even and at least 2");
    }
    n.shoot.steps = static_cast<int>(s);
  }
  if (auto v = get("numerics", "shoot_tol")) {
    n.shoot.tol = real_key(*v, "numerics.shoot_tol");
    if (!(n.shoot.tol > 0.0)) throw ConfigError("numerics.shoot_tol must be positive");
  }
  if (auto v = get("numerics", "fd_step")) {
    n.fd_step = real_key(*v, "numerics.fd_step");
    if (n.fd_step < 0.0) throw ConfigError("numerics.fd_step must be nonnegative (0 = default)");
  }
  if (auto v = get("numerics", "which")) n.which = *v;
  const auto& ids = verify_identities();
  if (std::find(ids.begin(), ids.end(), n.which) == ids.end()) {
    throw ConfigError("numerics.which: unknown identity '" + n.which + "'");
  }
  if (auto v = get("numerics", "cross_method")) {
    if (*v == "chain") {
      n.cross = CrossMethod::chain;
    } else if (*v == "fd" || *v == "finite_difference") {
      n.cross = CrossMethod::finite_difference;
    } else {
      throw ConfigError("numerics.cross_method must be chain or fd");
    }
  }
  if (auto v = get("numerics", "eigen_count")) {
    const long long k = parse_integer(*v, "numerics.eigen_count");
    if (k < 1 || k > 1000) throw ConfigError("numerics.eigen_count must be in [1, 1000]");
    n.eigen_count = static_cast<int>(k);
  }
  if (auto v = get("numerics", "fd_intervals")) {
    const long long k = parse_integer(*v, "numerics.fd_intervals");
    if (k < 10 || k > 10000000) throw ConfigError("numerics.fd_intervals must be in [10, 1e7]");
    n.fd_intervals = static_cast<int>(k);
  }
  if (auto v = get("numerics", "mu_list")) {
    n.mu_list = parse_real_list(*v, "numerics.mu_list");
    if (n.mu_list.empty()) throw ConfigError("numerics.mu_list is empty");
  }
  if (auto v = get("numerics", "weak_N_list")) {
    n.weak_points = parse_index_list(*v, "numerics.weak_N_list");
    if (n.weak_points.size() < 2) throw ConfigError("numerics.weak_N_list needs two or more entries");
  }

  OutputConfig& o = cfg.output;
  if (auto v = get("output", "prefix")) {
    o.prefix = *v;
    if (o.prefix.empty() || o.prefix.find_first_of("/\\") != std::string::npos) {
      throw ConfigError("output.prefix must be a nonempty file name stem");
    }
  }
  if (auto v = get("output", "continuum")) o.continuum = parse_bool(*v, "output.continuum");
  if (auto v = get("output", "timestamp")) o.timestamp = parse_bool(*v, "output.timestamp");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ProblemSpec build_problem(const ProblemConfig& c) {
  const Index n = c.dimension;
  try {
    if (c.hamiltonian == "random_quadratic") {
      ProblemSpec spec = random_quadratic_problem(c.seed, n, c.mass, c.horizon);
      spec.validate();
      return spec;
    }
    std::optional<HamiltonianModel> h;
    if (c.hamiltonian == "free") {
      h = free_particle(c.mass, n);
    } else if (c.hamiltonian == "harmonic") {
      h = n == 1 ? harmonic(c.mass, c.omega) : harmonic(c.mass, Vector::Constant(n, c.omega));
    } else if (c.hamiltonian == "quadratic") {
      const Matrix k = square_from(c.stiffness, n, 0.0, "problem.stiffness");
      check_symmetric(k, "problem.stiffness");
      h = quadratic_potential(c.mass, k);
    } else if (c.hamiltonian == "anharmonic") {
      h = anharmonic(c.mass, c.omega, c.lambda, n);
    } else {
      h = coupled(c.mass, c.omega, c.gamma, c.delta, n);
    }
    const Matrix a1 = square_from(c.f1_a, n, 0.0, "problem.f1_a");
    const Matrix a2 = square_from(c.f2_a, n, 0.0, "problem.f2_a");
    check_symmetric(a1, "problem.f1_a");
    check_symmetric(a2, "problem.f2_a");
    const Matrix c1 = square_from(c.f1_coupling, n, 1.0, "problem.f1_coupling");
    const Matrix c2 = square_from(c.f2_coupling, n, 1.0, "problem.f2_coupling");
    ProblemSpec spec{*h,
                     quadratic_generator(a1, c1),
                     quadratic_generator(a2, c2),
                     c.mass,
                     c.horizon,
                     vector_from(c.b1, n, "problem.b1"),
                     vector_from(c.b2, n, "problem.b2")};
    spec.validate();
    return spec;
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

}  // namespace gylab::cli
