#include "delayoc/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace delayoc {

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::vector<Entry> entries;
  int line = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw InputError(source + ":" + std::to_string(line) + ": " + msg);
}

std::vector<Section> split_sections(std::string_view text, const std::string& source) {
  std::vector<Section> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    // Strip a comment that is not inside quotes.
    std::string line;
    bool quoted = false;
    for (char ch : raw) {
      if (ch == '"') quoted = !quoted;
      if (ch == '#' && !quoted) break;
      line.push_back(ch);
    }
    if (quoted) fail(source, line_no, "unterminated string");
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(source, line_no, "malformed section header");
      out.push_back({trim(std::string_view(line).substr(1, line.size() - 2)), {}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected 'key = value'");
    if (out.empty()) fail(source, line_no, "entry outside of any section");
    Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) fail(source, line_no, "missing key");
    if (e.value.size() >= 2 && e.value.front() == '"' && e.value.back() == '"') {
      e.value = e.value.substr(1, e.value.size() - 2);
    } else if (e.value.find('"') != std::string::npos) {
      fail(source, line_no, "stray quote in value");
    }
    out.back().entries.push_back(std::move(e));
  }
  return out;
}

Expr parse_expr(const Entry& e, const std::string& source) {
  try {
    return Expr::parse(e.value);
  } catch (const ParseError& err) {
    fail(source, e.line, e.key + ": " + err.what());
  }
}

Rational parse_rational(const Entry& e, const std::string& source) {
  try {
    return Rational::parse(e.value);
  } catch (const std::exception& err) {
    fail(source, e.line, e.key + ": " + err.what());
  }
}

int parse_dim(const Entry& e, const std::string& source) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(e.value, &used);
    if (used != e.value.size() || v < 1 || v > 64) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(source, e.line, e.key + ": expected an integer between 1 and 64");
  }
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters");
  return v;
}

Bound parse_bound(const Entry& e, const std::string& source) {
  if (e.value == "free") return std::nullopt;
  std::istringstream is(e.value);
  std::string lo, hi, extra;
  if (!(is >> lo >> hi) || (is >> extra)) fail(source, e.line, e.key + ": expected 'free' or 'lo hi'");
  try {
    Interval iv{parse_double(lo), parse_double(hi)};
    if (!(iv.lo <= iv.hi)) fail(source, e.line, e.key + ": lower bound exceeds upper bound");
    return iv;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    fail(source, e.line, e.key + ": bounds must be finite numbers");
  }
}

/// Index from names like "f3" with the given prefix, or -1.
int suffix_index(const std::string& key, std::string_view prefix) {
  if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) return -1;
  int v = 0;
  for (std::size_t i = prefix.size(); i < key.size(); ++i) {
    if (key[i] < '0' || key[i] > '9') return -1;
    v = v * 10 + (key[i] - '0');
    if (v > 1000) return -1;
  }
  if (key[prefix.size()] == '0') return -1;
  return v;
}

std::vector<Expr> split_exprs(const std::string& text, const Entry& e, const std::string& source) {
  std::vector<Expr> out;
  std::size_t start = 0;
  while (true) {
    const auto semi = text.find(';', start);
    const std::string part = trim(std::string_view(text).substr(start, semi == std::string::npos ? std::string::npos
                                                                                               : semi - start));
    try {
      out.push_back(Expr::parse(part));
    } catch (const ParseError& err) {
      fail(source, e.line, e.key + ": " + err.what());
    }
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

Piece parse_piece(const Entry& e, const std::string& source) {
  const auto colon = e.value.find(':');
  if (colon == std::string::npos) fail(source, e.line, "piece: expected \"t0 t1 : expr\"");
  std::istringstream is(e.value.substr(0, colon));
  std::string t0, t1, extra;
  if (!(is >> t0 >> t1) || (is >> extra)) fail(source, e.line, "piece: expected two interval endpoints");
  Piece p;
  try {
    p.t0 = Rational::parse(t0);
    p.t1 = Rational::parse(t1);
  } catch (const std::exception& err) {
    fail(source, e.line, std::string("piece: ") + err.what());
  }
  if (!(p.t0 < p.t1)) fail(source, e.line, "piece: interval must satisfy t0 < t1");
  p.exprs = split_exprs(e.value.substr(colon + 1), e, source);
  return p;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_bound(const Bound& b) { return b ? fmt_double(b->lo) + " " + fmt_double(b->hi) : "free"; }

void write_pieces(std::ostringstream& os, const char* section, const std::vector<Piece>& pieces) {
  if (pieces.empty()) return;
  os << "\n[" << section << "]\n";
  for (const auto& p : pieces) {
    os << "piece = \"" << p.t0.str() << " " << p.t1.str() << " : ";
    for (std::size_t i = 0; i < p.exprs.size(); ++i) os << (i ? " ; " : "") << p.exprs[i].str();
    os << "\"\n";
  }
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

std::string gfmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

ProblemDef parse_problem(std::string_view text, const std::string& source) {
  const auto sections = split_sections(text, source);
  const Section* prob = nullptr;
  const Section* omega = nullptr;
  const Section* term = nullptr;
  for (const auto& s : sections) {
    const Section** slot = s.name == "problem" ? &prob : s.name == "omega" ? &omega : s.name == "terminal" ? &term
                                                                                                          : nullptr;
    if (!slot) fail(source, s.line, "unknown section [" + s.name + "]");
    if (*slot) fail(source, s.line, "duplicate section [" + s.name + "]");
    *slot = &s;
  }
  if (!prob) throw InputError(source + ": missing [problem] section");

  std::map<std::string, const Entry*> keys;
  for (const auto& e : prob->entries) {
    if (!keys.emplace(e.key, &e).second) fail(source, e.line, "duplicate key '" + e.key + "'");
  }
  auto need = [&](const std::string& k) -> const Entry& {
    auto it = keys.find(k);
    if (it == keys.end()) throw InputError(source + ": [problem] is missing key '" + k + "'");
    return *it->second;
  };

  ProblemDef p;
  p.n = parse_dim(need("n"), source);
  p.m = parse_dim(need("m"), source);
  p.a = parse_rational(need("a"), source);
  p.b = parse_rational(need("b"), source);
  p.r = parse_rational(need("r"), source);
  p.s = parse_rational(need("s"), source);
  p.f0 = parse_expr(need("f0"), source);
  p.g0 = keys.count("g0") ? parse_expr(need("g0"), source) : Expr::parse("0");
  if (keys.count("name")) p.name = need("name").value;
  if (keys.count("degenerate")) {
    const auto& e = need("degenerate");
    if (e.value != "true" && e.value != "false") fail(source, e.line, "degenerate: expected true or false");
    p.degenerate = e.value == "true";
  }
  for (int i = 1; i <= p.n; ++i) {
    p.f.push_back(parse_expr(need("f" + std::to_string(i)), source));
    p.phi.push_back(parse_expr(need("phi" + std::to_string(i)), source));
  }
  for (int j = 1; j <= p.m; ++j) p.psi.push_back(parse_expr(need("psi" + std::to_string(j)), source));

  for (const auto& [k, e] : keys) {
    static const std::set<std::string> fixed{"name", "n", "m", "a", "b", "r", "s", "f0", "g0", "degenerate"};
    if (fixed.count(k)) continue;
    const int fi = suffix_index(k, "f");
    const int pi = suffix_index(k, "phi");
    const int si = suffix_index(k, "psi");
    const bool ok = (fi >= 1 && fi <= p.n) || (pi >= 1 && pi <= p.n) || (si >= 1 && si <= p.m);
    if (!ok) fail(source, e->line, "unknown key '" + k + "'");
  }

  auto bounds = [&](const Section* sec, const char* prefix, int count) {
    std::vector<Bound> out(static_cast<std::size_t>(count));
    std::vector<bool> seen(static_cast<std::size_t>(count), false);
    if (!sec) return out;
    for (const auto& e : sec->entries) {
      const int idx = suffix_index(e.key, prefix);
      if (idx < 1 || idx > count) fail(source, e.line, "unknown key '" + e.key + "' in [" + sec->name + "]");
      if (seen[static_cast<std::size_t>(idx - 1)]) fail(source, e.line, "duplicate key '" + e.key + "'");
      seen[static_cast<std::size_t>(idx - 1)] = true;
      out[static_cast<std::size_t>(idx - 1)] = parse_bound(e, source);
    }
    return out;
  };
  p.omega = bounds(omega, "u", p.m);
  p.terminal = bounds(term, "x", p.n);

  if (auto diags = validate_problem(p); !diags.empty()) {
    std::string msg = source + ": invalid problem";
    for (const auto& d : diags) msg += "\n  " + d;
    throw InputError(msg);
  }
  return p;
}

CandidateSolution parse_candidate(std::string_view text, const std::string& source) {
  const auto sections = split_sections(text, source);
  CandidateSolution c;
  std::set<std::string> seen;
  for (const auto& s : sections) {
    if (!seen.insert(s.name).second) {
      fail(source, s.line, "duplicate section [" + s.name + "]");
    }
    std::vector<Piece>* target = nullptr;
    if (s.name == "xstar") target = &c.x_star;
    else if (s.name == "ustar") target = &c.u_star;
    else if (s.name == "S") target = &c.S;
    else if (s.name == "dSdt") target = &c.dS_dt;
    else if (s.name == "dSdx") target = &c.dS_dx;
    if (target) {
      for (const auto& e : s.entries) {
        if (e.key != "piece") fail(source, e.line, "expected 'piece = ...' in [" + s.name + "]");
        Piece p = parse_piece(e, source);
        if (!target->empty() && p.t0 < target->back().t1) {
          fail(source, e.line, "pieces must be increasing and non-overlapping");
        }
        target->push_back(std::move(p));
      }
      continue;
    }
    if (s.name == "feedback") {
      for (const auto& e : s.entries) {
        if (e.key != "ustar" || !c.feedback.empty()) fail(source, e.line, "expected a single 'ustar = ...'");
        c.feedback = split_exprs(e.value, e, source);
      }
      continue;
    }
    fail(source, s.line, "unknown section [" + s.name + "]");
  }
  if (c.u_star.empty()) throw InputError(source + ": missing [ustar] section");
  if (c.S.empty()) throw InputError(source + ": missing [S] section");
  return c;
}

std::string write_problem(const ProblemDef& p) {
  std::ostringstream os;
  os << "[problem]\n";
  if (!p.name.empty()) os << "name = \"" << p.name << "\"\n";
  os << "n = " << p.n << "\nm = " << p.m << "\n";
  os << "a = \"" << p.a.str() << "\"\nb = \"" << p.b.str() << "\"\n";
  os << "r = \"" << p.r.str() << "\"\ns = \"" << p.s.str() << "\"\n";
  if (p.degenerate) os << "degenerate = true\n";
  os << "f0 = \"" << p.f0.str() << "\"\n";
  for (std::size_t i = 0; i < p.f.size(); ++i) os << "f" << i + 1 << " = \"" << p.f[i].str() << "\"\n";
  os << "g0 = \"" << p.g0.str() << "\"\n";
  for (std::size_t i = 0; i < p.phi.size(); ++i) os << "phi" << i + 1 << " = \"" << p.phi[i].str() << "\"\n";
  for (std::size_t j = 0; j < p.psi.size(); ++j) os << "psi" << j + 1 << " = \"" << p.psi[j].str() << "\"\n";
  os << "\n[omega]\n";
  for (std::size_t j = 0; j < p.omega.size(); ++j) os << "u" << j + 1 << " = \"" << fmt_bound(p.omega[j]) << "\"\n";
  os << "\n[terminal]\n";
  for (std::size_t i = 0; i < p.terminal.size(); ++i) {
    os << "x" << i + 1 << " = \"" << fmt_bound(p.terminal[i]) << "\"\n";
  }
  return os.str();
}

std::string write_candidate(const CandidateSolution& c) {
  std::ostringstream os;
  write_pieces(os, "xstar", c.x_star);
  write_pieces(os, "ustar", c.u_star);
  write_pieces(os, "S", c.S);
  write_pieces(os, "dSdt", c.dS_dt);
  write_pieces(os, "dSdx", c.dS_dx);
  if (!c.feedback.empty()) {
    os << "\n[feedback]\nustar = \"";
    for (std::size_t i = 0; i < c.feedback.size(); ++i) os << (i ? " ; " : "") << c.feedback[i].str();
    os << "\"\n";
  }
  std::string out = os.str();
  if (!out.empty() && out.front() == '\n') out.erase(0, 1);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory_csv(std::ostream& os, const Trajectory& x, const ControlSignal& u) {
  os << "t";
  for (int i = 0; i < x.n(); ++i) os << ",x" << i;
  for (int j = 0; j < u.m(); ++j) os << ",u" << j;
  os << "\n";
  const auto& g = x.grid();
  for (std::int64_t k = 0; k < x.node_count(); ++k) {
    const double t = g.time(k);
    os << sci(t);
    for (double v : x.node(k)) os << "," << sci(v);
    for (double v : u.at(t)) os << "," << sci(v);
    os << "\n";
  }
}

std::string format_lattice(const DelayLattice& lat) {
  std::ostringstream os;
  os << "h = " << lat.h << ", k = " << lat.k << ", l = " << lat.l << ", N = " << lat.N << ", b~ = " << lat.b_tilde;
  return os.str();
}

std::string format_report(const VerificationReport& r) {
  auto flag = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  std::ostringstream os;
  char line[256];
  os << (r.degenerate ? "verification (non-delayed, single Hamiltonian)\n" : "verification\n");
  std::snprintf(line, sizeof line, "  %-22s %-14s %-14s %s\n", "check", "value", "tolerance", "result");
  os << line;
  std::snprintf(line, sizeof line, "  %-22s %-14s %-14s %s\n", "hj residual", gfmt(r.hj_max_residual).c_str(),
                gfmt(r.tol.hj).c_str(), flag(r.hj_pass));
  os << line;
  std::snprintf(line, sizeof line, "  %-22s %-14s %-14s %s%s\n", "boundary", gfmt(r.boundary_gap).c_str(),
                gfmt(r.tol.boundary).c_str(), flag(r.boundary_pass),
                r.terminal_in_set ? "" : " (x(b) outside G)");
  os << line;
  std::snprintf(line, sizeof line, "  %-22s %-14s %-14s %s\n", "maximality", gfmt(r.maximality_worst_gap).c_str(),
                gfmt(r.tol.maximality).c_str(), flag(r.maximality_pass));
  os << line;
  std::snprintf(line, sizeof line, "  %-22s %-14s %-14s %s\n", "cost identity", gfmt(r.cost_identity_gap).c_str(),
                gfmt(r.tol.cost).c_str(), flag(r.cost_pass));
  os << line;
  std::snprintf(line, sizeof line, "  cost C_D[u*] = %.9f, -S(a, x_a) = %.9f\n", r.cost, r.minus_S_a);
  os << line;
  os << "  convention: " << to_string(r.convention_used);
  if (r.convention_requested == Convention::Auto) {
    os << " (auto; other convention worst gap " << gfmt(r.maximality_other_gap) << ")";
  }
  os << "\n";
  if (r.convention_requested == Convention::Auto && r.convention_used == Convention::Minus) {
    os << "  note: maximality holds with eta = -dS/dx; the sign of the costate in H is ambiguous for this "
          "candidate\n";
  }
  if (r.feedback_gap >= 0.0) os << "  feedback law vs open-loop u*: " << gfmt(r.feedback_gap) << " (informational)\n";
  os << "  overall: " << flag(r.pass()) << "\n";
  return os.str();
}

std::string format_report_kv(const VerificationReport& r) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << "=" << v << "\n"; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  kv("hj_max_residual", gfmt(r.hj_max_residual));
  kv("hj_worst_time", gfmt(r.hj_worst_time));
  kv("hj_tolerance", gfmt(r.tol.hj));
  kv("hj_pass", b(r.hj_pass));
  kv("boundary_gap", gfmt(r.boundary_gap));
  kv("boundary_tolerance", gfmt(r.tol.boundary));
  kv("terminal_in_set", b(r.terminal_in_set));
  kv("boundary_pass", b(r.boundary_pass));
  kv("maximality_worst_gap", gfmt(r.maximality_worst_gap));
  kv("maximality_worst_time", gfmt(r.maximality_worst_time));
  kv("maximality_tolerance", gfmt(r.tol.maximality));
  kv("maximality_convention_requested", to_string(r.convention_requested));
  kv("maximality_convention_used", to_string(r.convention_used));
  kv("maximality_pass", b(r.maximality_pass));
  kv("cost", gfmt(r.cost));
  kv("minus_S_a", gfmt(r.minus_S_a));
  kv("cost_identity_gap", gfmt(r.cost_identity_gap));
  kv("cost_tolerance", gfmt(r.tol.cost));
  kv("cost_pass", b(r.cost_pass));
  kv("s_continuity_gap", gfmt(r.s_continuity_gap));
  if (r.feedback_gap >= 0.0) kv("feedback_gap", gfmt(r.feedback_gap));
  kv("pass", b(r.pass()));
  return os.str();
}

}  // namespace delayoc
