#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "vdwlab/cli.hpp"
#include "vdwlab/dimer.hpp"
#include "vdwlab/errors.hpp"
#include "vdwlab/multipole.hpp"
#include "vdwlab/operators.hpp"
#include "vdwlab/spectra.hpp"
#include "vdwlab/vdw.hpp"

namespace vdwlab::cli {

namespace {

const json kCommon = {{"name", ""},
                      {"out_dir", "."},
                      {"rng_seed", kDefaultSeed},
                      {"solver", "davidson"},
                      {"tolerance", 1e-10}};

json model_1d(int Z, int points, double box) {
  return {{"Z", Z},           {"e2", 1.0},        {"softening", 1.0}, {"kinetic", "nonrelativistic"},
          {"dim", 1},         {"electrons", 1},   {"points", points}, {"box", box}};
}

json with(json a, const json& b) {
  for (auto it = b.begin(); it != b.end(); ++it) a[it.key()] = it.value();
  return a;
}

json command_defaults(const std::string& c) {
  if (c == "atom-solve")
    return with(model_1d(1, 256, 25.6), {{"states", 4}, {"sector", "full"}});
  if (c == "vdw-c6" || c == "vdw-c8")
    return with(model_1d(1, 256, 96.0),
                {{"model", "two-level"},
                 {"gap", 1.0},
                 {"dipole", 1.0},
                 {"gap_q", 2.0},
                 {"quad", 0.0},
                 {"quad_ground", 0.0},
                 {"omega", 1.0},
                 {"n_keep", 20},
                 {"curve", json::array({5, 10, 20, 40})},
                 {"direction", json::array({0.0, 0.0, 1.0})}});
  if (c == "vdw-c9")
    return {{"model", "two-level"}, {"gap", 1.0},   {"dipole", 1.0},
            {"omega", 1.0},         {"n_keep", 4},  {"e2", 1.0},
            {"side", 1.0},          {"couplings", json::array({1.0, 1.0, 1.0})}};
  if (c == "dimer-scan")
    return with(model_1d(1, 256, 96.0), {{"d_min", 20.0},
                                         {"d_max", 50.0},
                                         {"d_count", 10},
                                         {"sector", "symmetric"},
                                         {"n_keep", 40}});
  if (c == "verify-kernel")
    return {{"widths", json::array({0.5, 1.0, 2.0})}, {"points", 64}, {"box_factor", 12.0},
            {"r_cut", 40.0}};
  if (c == "verify-localization")
    return {{"rho", json::array({64.0, 128.0, 256.0})}, {"points", 128},
            {"kinetic", "pseudo-relativistic"}};
  if (c == "verify-multipole")
    return {{"k", 4},        {"configs", 100}, {"d_lo", 100.0}, {"d_hi", 1000.0},
            {"d_count", 10}, {"e2", 1.0},      {"max_z", 2}};
  if (c == "verify-orthogonality")
    return {{"omega", 1.0}, {"omega_2", 1.0}, {"n_keep", 20},
            {"direction", json::array({0.0, 0.0, 1.0})}, {"e2", 1.0}};
  if (c == "verify-decay")
    return with(model_1d(1, 2048, 204.8), {{"states", 3},
                                           {"window_lo", 0.2},
                                           {"window_hi", 0.6},
                                           {"noise_floor", 1e-10},
                                           {"tail_start", 1e-5},
                                           {"synthetic_rate", 1.0}});
  if (c == "verify-ionization")
    return with(model_1d(2, 256, 102.4), {{"s0", 4.0}, {"doublings", 3}});
  throw UsageError("unknown command '" + c + "'");
}

// ---------------------------------------------------------------------------
// typed access and validation

double num(const json& v, const char* k) { return v.at(k).get<double>(); }
int inum(const json& v, const char* k) { return v.at(k).get<int>(); }
std::string str(const json& v, const char* k) { return v.at(k).get<std::string>(); }

std::vector<double> dlist(const json& v, const char* k) {
  return v.at(k).get<std::vector<double>>();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

json convert(const std::string& key, const json& like, const std::string& text) {
  auto bad = [&] { return UsageError("cannot parse --" + key + " value '" + text + "'"); };
  try {
    std::size_t pos = 0;
    if (like.is_number_unsigned()) {
      if (!text.empty() && text[0] == '-') throw bad();
      const auto v = std::stoull(text, &pos);
      if (pos != text.size()) throw bad();
      return v;
    }
    if (like.is_number_integer()) {
      const auto v = std::stoll(text, &pos);
      if (pos != text.size()) throw bad();
      return v;
    }
    if (like.is_number_float()) {
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw bad();
      return v;
    }
    if (like.is_array()) {
      const bool ints = !like.empty() && like[0].is_number_integer();
      json out = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(convert(key, ints ? json(0) : json(0.0), item));
      if (out.empty()) throw bad();
      return out;
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  return text;
}

json coerce(const std::string& key, const json& like, const json& v) {
  if (like.is_number_float() && v.is_number()) return v.get<double>();
  if (like.is_number_unsigned() && v.is_number_unsigned()) return v;
  if (like.is_number_unsigned() && v.is_number_integer() && v.get<long long>() >= 0)
    return v.get<unsigned long long>();
  if (like.is_number_integer() && !like.is_number_unsigned() && v.is_number_integer()) return v;
  if (like.is_string() && v.is_string()) return v;
  if (like.is_array() && v.is_array()) {
    const bool ints = !like.empty() && like[0].is_number_integer();
    json out = json::array();
    for (const auto& e : v) {
      if (ints && !e.is_number_integer()) throw UsageError("'" + key + "' expects integers");
      if (!e.is_number()) throw UsageError("'" + key + "' expects numbers");
      out.push_back(ints ? json(e.get<long long>()) : json(e.get<double>()));
    }
    return out;
  }
  throw UsageError("'" + key + "' has the wrong type");
}

bool has(const json& v, const char* k) { return v.contains(k); }

AtomModel atom_of(const json& v) {
  AtomModel a;
  a.Z = inum(v, "Z");
  a.e2 = num(v, "e2");
  a.softening = num(v, "softening");
  a.kinetic = parse_kinetic(str(v, "kinetic"));
  a.dim = inum(v, "dim");
  a.n_electrons = inum(v, "electrons");
  return a;
}

GridSpec grid_of(const json& v, int dim) {
  GridSpec g;
  g.dim = dim;
  g.points = inum(v, "points");
  g.box_length = num(v, "box");
  g.particles = 1;
  return g;
}

SolverOptions solver_of(const json& v) {
  SolverOptions o;
  const std::string m = str(v, "solver");
  o.method = m == "lanczos" ? EigenMethod::Lanczos : EigenMethod::Davidson;
  o.tolerance = num(v, "tolerance");
  o.seed = v.at("rng_seed").get<std::uint64_t>();
  return o;
}

Vec3 vec3_of(const json& v, const char* k) {
  const auto d = dlist(v, k);
  require(d.size() == 3, std::string("'") + k + "' needs three components");
  require(std::hypot(d[0], d[1], d[2]) > 0.0, std::string("'") + k + "' must be nonzero");
  return {d[0], d[1], d[2]};
}

// ---------------------------------------------------------------------------
// output helpers

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
};

void write_csv(const Table& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open " + path.string());
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << "\n";
  char buf[64];
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << ",";
      if (r[i].is_number_float()) {
        std::snprintf(buf, sizeof buf, "%.17g", r[i].get<double>());
        out << buf;
      } else if (r[i].is_string()) {
        out << r[i].get<std::string>();
      } else {
        out << r[i].dump();
      }
    }
    out << "\n";
  }
}

struct Outputs {
  json results = json::object();
  Table table;
  std::vector<std::pair<std::string, WaveFunction>> dumps;
};

json vec_json(const std::vector<double>& v) { return json(v); }

// ---------------------------------------------------------------------------
// commands

Outputs cmd_atom_solve(const json& v) {
  const AtomModel atom = atom_of(v);
  const SpectrumSlice s = solve_sector(atom, grid_of(v, atom.dim), parse_sector(str(v, "sector")),
                                       inum(v, "states"), solver_of(v));
  Outputs o;
  o.results = {{"eigenvalues", vec_json(s.eigenvalues)},
               {"residuals", vec_json(s.residuals)},
               {"gap", s.gap},
               {"sector", to_string(s.sector)},
               {"max_residual", *std::max_element(s.residuals.begin(), s.residuals.end())}};
  o.table.header = {"index", "energy", "residual"};
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    o.table.rows.push_back({static_cast<int>(i), s.eigenvalues[i], s.residuals[i]});
  o.dumps.emplace_back("ground", s.eigenvectors.front());
  return o;
}

struct ModelAtoms {
  std::vector<AtomSpectrum> atoms;
  std::vector<double> residuals;
};

ModelAtoms pair_atoms(const json& v, int n_max, int degree) {
  const std::string model = str(v, "model");
  ModelAtoms m;
  if (model == "two-level") {
    const AtomSpectrum a = two_level_atom(num(v, "gap"), num(v, "dipole"));
    m.atoms = {a, a};
  } else if (model == "three-level") {
    const AtomSpectrum a = three_level_atom(num(v, "gap"), num(v, "dipole"), num(v, "gap_q"),
                                            num(v, "quad"), num(v, "quad_ground"));
    m.atoms = {a, a};
  } else if (model == "oscillator") {
    const AtomSpectrum a = oscillator_atom(num(v, "omega"), n_max, degree);
    m.atoms = {a, a};
  } else {
    const AtomModel atom = atom_of(v);
    const SpectrumSlice s =
        solve_sector(atom, grid_of(v, atom.dim), Sector::Full, n_max, solver_of(v));
    const AtomSpectrum a = atom_spectrum_from_states(s.eigenvalues, s.eigenvectors, degree);
    m.atoms = {a, a};
    m.residuals = s.residuals;
  }
  return m;
}

Outputs cmd_vdw_pair(const json& v, bool c8) {
  const int n_keep = inum(v, "n_keep");
  std::vector<int> curve = v.at("curve").get<std::vector<int>>();
  const int n_max = std::max(n_keep, *std::max_element(curve.begin(), curve.end()));
  const ModelAtoms m = pair_atoms(v, n_max, 3);
  const Vec3 dir = vec3_of(v, "direction");
  const double e2 = num(v, "e2");

  std::vector<AtomSpectrum> kept;
  for (const auto& a : m.atoms) kept.push_back(a.truncated(n_keep));
  const ProductBasis basis(kept);
  VdwReport r;
  r.a1 = compute_a1(basis, dir, e2);
  r.a2 = compute_a2(basis, dir, e2);
  r.n_keep = basis.atom(0).size();
  r.truncation_curve = truncation_curve(m.atoms, curve, dir, e2);
  r.residuals = m.residuals;
  r.direction = dir;
  r.e2 = e2;

  Outputs o;
  json tc = json::array();
  o.table.header = {"n_keep", "a1"};
  for (const auto& [n, a] : r.truncation_curve) {
    tc.push_back({{"n_keep", n}, {"a1", a}});
    o.table.rows.push_back({n, a});
  }
  o.results = {{"a1", r.a1},
               {"a2", r.a2},
               {"n_keep", r.n_keep},
               {"truncation_curve", tc},
               {"eigen_residuals", vec_json(r.residuals)},
               {"direction", {dir[0], dir[1], dir[2]}}};
  o.results["coefficient"] = c8 ? r.a2 : r.a1;
  return o;
}

Outputs cmd_vdw_c9(const json& v) {
  const std::string model = str(v, "model");
  AtomSpectrum a = model == "oscillator" ? oscillator_atom(num(v, "omega"), inum(v, "n_keep"), 2)
                                         : two_level_atom(num(v, "gap"), num(v, "dipole"));
  if (model != "oscillator" && model != "two-level")
    throw UsageError("vdw-c9 supports the two-level and oscillator models");
  const ProductBasis basis({a, a, a});
  const double s = num(v, "side");
  const std::array<Vec3, 3> x{{{0.0, 0.0, 0.0}, {s, 0.0, 0.0}, {0.5 * s, 0.5 * std::sqrt(3.0) * s, 0.0}}};
  const auto c = dlist(v, "couplings");
  require(c.size() == 3, "'couplings' needs three entries");
  const double a3 = compute_a3(basis, x, num(v, "e2"), {c[0], c[1], c[2]});
  const double d = triangle_scale(x);
  Outputs o;
  o.results = {{"a3", a3}, {"d", d}, {"three_body_energy", a3 / std::pow(d, 9)}};
  return o;
}

Outputs cmd_dimer_scan(const json& v) {
  DimerModel m;
  m.atom = atom_of(v);
  m.grid = grid_of(v, 1);
  m.sector = parse_sector(str(v, "sector"));
  const SolverOptions opt = solver_of(v);
  const auto D = separation_grid(m.grid, num(v, "d_min"), num(v, "d_max"), inum(v, "d_count"));
  const DimerScan scan = scan_and_fit(m, D, opt);

  const SpectrumSlice s = solve_sector(m.atom, m.grid, Sector::Full, inum(v, "n_keep"), opt);
  const AtomSpectrum a = atom_spectrum_from_states(s.eigenvalues, s.eigenvectors, 1);
  const double a1 = compute_a1(ProductBasis({a, a}), {0.0, 0.0, 1.0}, m.atom.e2);

  Outputs o;
  json pts = json::array();
  double max_res = 0.0;
  o.table.header = {"D", "energy", "mu_inf", "first_order", "dispersion", "residual"};
  for (const auto& p : scan.points) {
    pts.push_back({{"D", p.D},
                   {"energy", p.energy},
                   {"mu_inf", p.mu},
                   {"first_order", p.first_order},
                   {"dispersion", p.dispersion},
                   {"residual", p.residual}});
    o.table.rows.push_back({p.D, p.energy, p.mu, p.first_order, p.dispersion, p.residual});
    max_res = std::max(max_res, p.residual);
  }
  for (double r : s.residuals) max_res = std::max(max_res, r);
  o.results = {{"atom_energy", scan.atom_energy},
               {"C6", scan.C6},
               {"C8", scan.C8},
               {"fit_rms", scan.fit_rms},
               {"dispersion_slope", scan.dispersion_slope},
               {"residual_slope", scan.residual_slope},
               {"raw_slope", scan.raw_slope},
               {"a1", a1},
               {"c6_vs_a1", std::abs(scan.C6 - a1) / a1},
               {"max_residual", max_res},
               {"points", pts}};
  return o;
}

Outputs cmd_verify_kernel(const json& v) {
  Outputs o;
  o.table.header = {"width", "fft_form", "kernel_form", "relative_difference"};
  json rows = json::array();
  double worst = 0.0;
  for (double w : dlist(v, "widths")) {
    const GridSpec g{3, inum(v, "points"), num(v, "box_factor") * w, 1};
    const WaveFunction psi = WaveFunction::sample(g, [w](std::span<const double> x) {
                               return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) /
                                                    (2.0 * w * w)),
                                           0.0);
                             }).normalized();
    const double f = kinetic_form(KineticKind::PseudoRelativistic, psi);
    const double k = kinetic_form_kernel(psi, {num(v, "r_cut")});
    const double rel = std::abs(f - k) / std::abs(f);
    worst = std::max(worst, rel);
    rows.push_back({{"width", w}, {"fft_form", f}, {"kernel_form", k}, {"relative_difference", rel}});
    o.table.rows.push_back({w, f, k, rel});
  }
  o.results = {{"rows", rows}, {"max_relative_difference", worst}};
  return o;
}

}  // namespace

// Localization experiment, shared with the tests through run().
namespace {

WaveFunction radial_bump(const GridSpec& g, double center, double width) {
  return WaveFunction::sample(g, [=](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double t = (std::sqrt(r2) - center) / width;
    return cplx(std::exp(-t * t), 0.0);
  });
}

Outputs cmd_verify_localization(const json& v) {
  const KineticKind kind = parse_kinetic(str(v, "kinetic"));
  const int n = inum(v, "points");
  Outputs o;
  o.table.header = {"part", "rho", "localization_error", "norm2", "ratio"};
  json shell = json::array(), far = json::array();
  double c_shell = 0.0, q_min = INFINITY, c_far = 0.0, far_rel = 0.0;
  for (double rho : dlist(v, "rho")) {
    const CutoffFamily cut(rho);
    {
      const GridSpec g{3, n, 1.25 * rho, 1};
      const WaveFunction h = radial_bump(g, 3.0 * rho / 16.0, rho / 32.0);
      const double le = localization_error_1(h, cut, kind);
      const double chi = shell_norm2(h, rho);
      const double q = std::abs(le) * rho * rho / chi;
      c_shell = std::max(c_shell, q);
      q_min = std::min(q_min, q);
      shell.push_back({{"rho", rho}, {"localization_error", le}, {"shell_norm2", chi}, {"ratio", q}});
      o.table.rows.push_back({"shell", rho, le, chi, q});
    }
    {
      const GridSpec g{3, n, 3.5 * rho, 1};
      const WaveFunction h = radial_bump(g, 1.5 * rho, rho / 32.0);
      const double le = localization_error_1(h, cut, kind);
      const double nn = h.norm() * h.norm();
      const double q = std::abs(le) * std::exp(rho / 64.0) / nn;
      c_far = std::max(c_far, q);
      far_rel = std::max(far_rel, std::abs(le) / kinetic_form(kind, h));
      far.push_back({{"rho", rho}, {"localization_error", le}, {"norm2", nn}, {"ratio", q}});
      o.table.rows.push_back({"far", rho, le, nn, q});
    }
  }
  o.results = {{"shell", shell},
               {"C", c_shell},
               {"shell_ratio_spread", c_shell / q_min},
               {"far", far},
               {"C_far", c_far},
               {"far_relative_to_kinetic", far_rel}};
  return o;
}

std::vector<ClusterPair> random_family(std::uint64_t seed, int count, int max_z, double e2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> zd(1, max_z);
  std::vector<ClusterPair> fam;
  for (int i = 0; i < count; ++i) {
    ClusterPair p;
    p.Z1 = zd(rng);
    p.Z2 = zd(rng);
    p.e2 = e2;
    for (int j = 0; j < p.Z1; ++j) p.positions_1.push_back({nd(rng), nd(rng), nd(rng)});
    for (int j = 0; j < p.Z2; ++j) p.positions_2.push_back({nd(rng), nd(rng), nd(rng)});
    Vec3 d{nd(rng), nd(rng), nd(rng)};
    const double nrm = std::hypot(d[0], d[1], d[2]);
    for (auto& c : d) c /= nrm;
    p.direction = d;
    fam.push_back(p);
  }
  return fam;
}

// e^2 times the sum of the absolute values of the terms making up f_n
double term_scale(const ClusterPair& p, int n) {
  auto pw = [n](const Vec3& x) { return std::pow(std::hypot(x[0], x[1], x[2]), n); };
  double s = 0.0;
  for (const auto& x : p.positions_1) s += p.Z2 * pw(x);
  for (const auto& x : p.positions_2) s += p.Z1 * pw(x);
  for (const auto& a : p.positions_1)
    for (const auto& b : p.positions_2) s += pw({a[0] - b[0], a[1] - b[1], a[2] - b[2]});
  return p.e2 * s;
}

Outputs cmd_verify_multipole(const json& v) {
  const auto fam = random_family(v.at("rng_seed").get<std::uint64_t>(), inum(v, "configs"),
                                 inum(v, "max_z"), num(v, "e2"));
  double f0 = 0.0, f1 = 0.0, c2 = 0.0, c3 = 0.0, dmax = 0.0;
  for (const auto& p : fam) {
    f0 = std::max(f0, std::abs(f_n(p, 0) + p.e2 * p.Z1 * p.Z2) / term_scale(p, 0));
    f1 = std::max(f1, std::abs(f_n(p, 1)) / term_scale(p, 1));
    c2 = std::max(c2, std::abs(f2_closed(p) - f_n(p, 2)) / term_scale(p, 2));
    c3 = std::max(c3, std::abs(f3_closed(p) - f_n(p, 3)) / term_scale(p, 3));
    dmax = std::max(dmax, d_beta(p));
  }
  const int count = inum(v, "d_count");
  std::vector<double> D;
  for (int i = 0; i < count; ++i)
    D.push_back(num(v, "d_lo") * dmax *
                std::pow(num(v, "d_hi") / num(v, "d_lo"), count == 1 ? 0.0 : double(i) / (count - 1)));
  const RemainderReport r = remainder_check(fam, inum(v, "k"), D);
  Outputs o;
  o.table.header = {"D", "max_R_k", "bound_value"};
  for (const auto& row : r.rows) o.table.rows.push_back({row.D, row.max_R, row.bound});
  o.results = {{"k", r.k},
               {"slope", r.slope},
               {"expected_slope", -(r.k + 1)},
               {"constant", r.constant},
               {"d_beta_max", dmax},
               {"f0_cancellation", f0},
               {"f1_max", f1},
               {"f2_closed_vs_legendre", c2},
               {"f3_closed_vs_legendre", c3}};
  return o;
}

Outputs cmd_verify_orthogonality(const json& v) {
  const int n_keep = inum(v, "n_keep");
  const ProductBasis basis(
      {oscillator_atom(num(v, "omega"), n_keep, 5), oscillator_atom(num(v, "omega_2"), n_keep, 5)});
  const Vec3 dir = vec3_of(v, "direction");
  const auto entries = orthogonality_battery(basis, dir, num(v, "e2"));
  Outputs o;
  json rows = json::array();
  double worst = 0.0;
  o.table.header = {"inner_product", "real", "imag", "scale", "relative"};
  for (const auto& e : entries) {
    rows.push_back({{"name", e.name},
                    {"real", e.value.real()},
                    {"imag", e.value.imag()},
                    {"scale", e.scale},
                    {"relative", e.relative}});
    o.table.rows.push_back({"\"" + e.name + "\"", e.value.real(), e.value.imag(), e.scale, e.relative});
    worst = std::max(worst, e.relative);
  }
  o.results = {{"entries", rows},
               {"max_relative", worst},
               {"a1", compute_a1(basis, dir, num(v, "e2"))},
               {"a2", compute_a2(basis, dir, num(v, "e2"))}};
  return o;
}

Outputs cmd_verify_decay(const json& v) {
  const AtomModel atom = atom_of(v);
  const GridSpec g = grid_of(v, atom.dim);
  const SpectrumSlice s = solve_sector(atom, g, Sector::Full, inum(v, "states"), solver_of(v));
  DecayFitOptions fo;
  fo.window_lo = num(v, "window_lo");
  fo.window_hi = num(v, "window_hi");
  fo.noise_floor = num(v, "noise_floor");
  fo.tail_start = num(v, "tail_start");
  Outputs o;
  o.table.header = {"state", "radius", "log_amplitude"};
  json states = json::array();
  for (std::size_t i = 0; i < s.eigenvectors.size(); ++i) {
    const DecayFit f = fit_decay(s.eigenvectors[i], fo);
    states.push_back({{"index", static_cast<int>(i)},
                      {"energy", s.eigenvalues[i]},
                      {"residual", s.residuals[i]},
                      {"rate_b", f.rate_b},
                      {"fit_residual", f.fit_residual},
                      {"samples", static_cast<int>(f.radii.size())}});
    for (std::size_t j = 0; j < f.radii.size(); ++j)
      o.table.rows.push_back({std::to_string(i), f.radii[j], f.log_amplitudes[j]});
  }
  const double b = num(v, "synthetic_rate");
  const WaveFunction syn = WaveFunction::sample(g, [b](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return cplx(std::exp(-b * std::sqrt(r2)), 0.0);
  });
  const DecayFit fs = fit_decay(syn, fo);
  for (std::size_t j = 0; j < fs.radii.size(); ++j)
    o.table.rows.push_back({"synthetic", fs.radii[j], fs.log_amplitudes[j]});
  o.results = {{"states", states},
               {"synthetic_rate", b},
               {"synthetic_fit", fs.rate_b},
               {"synthetic_relative_error", std::abs(fs.rate_b - b) / b}};
  return o;
}

Outputs cmd_verify_ionization(const json& v) {
  const AtomModel atom = atom_of(v);
  const GridSpec g = grid_of(v, 1);
  const SolverOptions opt = solver_of(v);
  const IonizationLadder l = ionization_ladder(atom, g, opt);
  const WeylProbe w = weyl_probe(atom, g, num(v, "s0"), inum(v, "doublings"), opt);
  bool monotone = true;
  for (std::size_t i = 1; i < w.energies.size(); ++i)
    monotone = monotone && w.energies[i] < w.energies[i - 1];
  bool above = true;
  for (double e : w.energies) above = above && e > w.threshold;
  Outputs o;
  o.table.header = {"separation", "energy", "threshold"};
  for (std::size_t i = 0; i < w.energies.size(); ++i)
    o.table.rows.push_back({w.separations[i], w.energies[i], w.threshold});
  o.results = {{"energies", vec_json(l.energies)},
               {"differences", vec_json(l.differences)},
               {"residuals", vec_json(l.residuals)},
               {"probe_separations", vec_json(w.separations)},
               {"probe_energies", vec_json(w.energies)},
               {"threshold", w.threshold},
               {"probe_monotone", monotone},
               {"probe_above_threshold", above}};
  return o;
}

Outputs dispatch(const json& v) {
  const std::string c = v.at("command").get<std::string>();
  if (c == "atom-solve") return cmd_atom_solve(v);
  if (c == "vdw-c6") return cmd_vdw_pair(v, false);
  if (c == "vdw-c8") return cmd_vdw_pair(v, true);
  if (c == "vdw-c9") return cmd_vdw_c9(v);
  if (c == "dimer-scan") return cmd_dimer_scan(v);
  if (c == "verify-kernel") return cmd_verify_kernel(v);
  if (c == "verify-localization") return cmd_verify_localization(v);
  if (c == "verify-multipole") return cmd_verify_multipole(v);
  if (c == "verify-orthogonality") return cmd_verify_orthogonality(v);
  if (c == "verify-decay") return cmd_verify_decay(v);
  if (c == "verify-ionization") return cmd_verify_ionization(v);
  throw UsageError("unknown command '" + c + "'");
}

std::string usage_text() {
  std::string s = "usage: vdwlab <command> [--config file.json] [--key value ...]\ncommands:\n";
  for (const auto& c : commands()) s += "  " + c + "\n";
  s += "run 'vdwlab <command> --help' for the keys of a command\n";
  return s;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

void report_error(const std::string& category, const std::string& message) {
  std::cerr << json({{"error", category}, {"message", message}}).dump() << "\n";
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{
      "atom-solve",          "vdw-c6",           "vdw-c8",
      "vdw-c9",              "dimer-scan",       "verify-kernel",
      "verify-localization", "verify-multipole", "verify-orthogonality",
      "verify-decay",        "verify-ionization"};
  return c;
}

json defaults(const std::string& command) {
  json d = with(kCommon, command_defaults(command));
  d["command"] = command;
  d["name"] = command;
  return d;
}

RunConfig resolve(const std::string& command, const json& file_values, const json& flag_values) {
  json v = defaults(command);
  for (const json* src : {&file_values, &flag_values}) {
    if (src->is_null()) continue;
    if (!src->is_object()) throw UsageError("configuration must be a JSON object");
    for (auto it = src->begin(); it != src->end(); ++it) {
      if (it.key() == "command") {
        if (it.value() != command) throw UsageError("config file is for a different command");
        continue;
      }
      if (!v.contains(it.key()))
        throw UsageError("unknown key '" + it.key() + "' for " + command);
      v[it.key()] = coerce(it.key(), v[it.key()], it.value());
    }
  }
  RunConfig cfg{v};
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  const json& v = cfg.values;
  auto positive = [&](const char* k) {
    if (has(v, k)) require(num(v, k) > 0.0, std::string("'") + k + "' must be positive");
  };
  auto at_least = [&](const char* k, int lo) {
    if (has(v, k))
      require(inum(v, k) >= lo, std::string("'") + k + "' must be >= " + std::to_string(lo));
  };
  require(!str(v, "name").empty(), "'name' must not be empty");
  require(str(v, "solver") == "davidson" || str(v, "solver") == "lanczos",
          "'solver' must be davidson or lanczos");
  for (const char* k : {"tolerance", "box", "softening", "gap", "omega", "omega_2", "side",
                        "d_min", "box_factor", "r_cut", "d_lo", "s0", "synthetic_rate"})
    positive(k);
  for (const char* k : {"states", "n_keep", "d_count", "configs", "max_z", "electrons", "Z"})
    at_least(k, 1);
  at_least("points", 4);
  at_least("doublings", 0);
  if (has(v, "e2")) require(num(v, "e2") >= 0.0, "'e2' must be non-negative");
  if (has(v, "d_max")) require(num(v, "d_max") >= num(v, "d_min"), "'d_max' must be >= 'd_min'");
  if (has(v, "d_hi")) require(num(v, "d_hi") > num(v, "d_lo"), "'d_hi' must exceed 'd_lo'");
  if (has(v, "k")) require(inum(v, "k") >= 1 && inum(v, "k") <= 12, "'k' must lie in [1, 12]");
  if (has(v, "dim")) require(inum(v, "dim") == 1 || inum(v, "dim") == 3, "'dim' must be 1 or 3");
  if (has(v, "tail_start"))
    require(num(v, "tail_start") > num(v, "noise_floor") && num(v, "noise_floor") > 0.0,
            "'tail_start' must exceed 'noise_floor' > 0");
  if (has(v, "window_lo"))
    require(num(v, "window_lo") >= 0.0 && num(v, "window_lo") < num(v, "window_hi") &&
                num(v, "window_hi") <= 1.0,
            "decay window must satisfy 0 <= lo < hi <= 1");
  for (const char* k : {"widths", "rho"})
    if (has(v, k)) {
      require(!v.at(k).empty(), std::string("'") + k + "' must not be empty");
      for (double x : dlist(v, k)) require(x > 0.0, std::string("'") + k + "' must be positive");
    }
  if (has(v, "curve")) {
    require(!v.at("curve").empty(), "'curve' must not be empty");
    for (int x : v.at("curve").get<std::vector<int>>()) require(x >= 1, "'curve' entries must be >= 1");
  }
  if (has(v, "direction")) vec3_of(v, "direction");
  if (has(v, "model")) {
    const std::string m = str(v, "model");
    require(m == "two-level" || m == "three-level" || m == "oscillator" || m == "grid",
            "'model' must be two-level, three-level, oscillator or grid");
  }
  try {
    if (has(v, "kinetic")) parse_kinetic(str(v, "kinetic"));
    if (has(v, "sector")) parse_sector(str(v, "sector"));
    if (has(v, "Z") && has(v, "dim")) {
      atom_of(v).validate();
      grid_of(v, inum(v, "dim")).validate();
    } else if (has(v, "Z")) {
      AtomModel a = atom_of(with(v, {{"dim", 1}}));
      a.validate();
      grid_of(v, 1).validate();
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

RunResult run(const RunConfig& cfg) {
  RunResult res;
  const json& v = cfg.values;
  try {
    Outputs o = dispatch(v);
    const std::filesystem::path dir = str(v, "out_dir");
    std::filesystem::create_directories(dir);
    const std::string name = str(v, "name");
    res.summary = {{"command", cfg.command()},
                   {"rng_seed", v.at("rng_seed")},
                   {"config", v},
                   {"results", o.results}};
    if (!o.table.header.empty()) {
      const auto csv = dir / (name + ".csv");
      write_csv(o.table, csv);
      res.files.push_back(csv);
    }
    for (const auto& [tag, psi] : o.dumps) {
      const auto p = dir / (name + "." + tag + ".dump");
      write_dump(psi, p);
      res.files.push_back(p);
    }
    res.summary_text = dump17(res.summary);
    res.summary_path = dir / (name + ".summary.json");
    std::ofstream out(res.summary_path);
    if (!out) throw DomainError("cannot open " + res.summary_path.string());
    out << res.summary_text;
  } catch (const UsageError& e) {
    res.exit_code = kExitUsage;
    res.error_category = "usage";
    res.error_message = e.what();
  } catch (const ConvergenceError& e) {
    res.exit_code = kExitComputation;
    res.error_category = e.category();
    res.error_message = std::string(e.what()) + " (best residual " +
                        std::to_string(e.best_residual()) + ")";
  } catch (const Error& e) {
    res.exit_code = kExitComputation;
    res.error_category = e.category();
    res.error_message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitComputation;
    res.error_category = "internal";
    res.error_message = e.what();
  }
  return res;
}

int main_entry(int argc, char** argv) {
  if (const char* t = std::getenv("VDWLAB_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
  if (argc < 2) {
    std::cerr << usage_text();
    report_error("usage", "missing command");
    return kExitUsage;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h") {
    std::cout << usage_text();
    return kExitOk;
  }
  json base;
  try {
    base = defaults(command);
  } catch (const UsageError& e) {
    std::cerr << usage_text();
    report_error("usage", e.what());
    return kExitUsage;
  }

  CLI::App app("vdwlab " + command);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with a flat object of keys");
  std::map<std::string, std::string> raw;
  for (auto it = base.begin(); it != base.end(); ++it) {
    if (it.key() == "command") continue;
    app.add_option(flag_name(it.key()), raw[it.key()], "default: " + it.value().dump());
  }
  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitUsage;
  }

  RunConfig cfg;
  try {
    json file = nullptr;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config file " + config_path);
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError(std::string("bad config file: ") + e.what());
      }
    }
    json flags = json::object();
    for (const auto& [key, text] : raw)
      if (app.get_option(flag_name(key))->count() > 0) flags[key] = convert(key, base[key], text);
    cfg = resolve(command, file, flags);
  } catch (const UsageError& e) {
    report_error("usage", e.what());
    return kExitUsage;
  }

  const RunResult r = run(cfg);
  if (r.exit_code != kExitOk) {
    report_error(r.error_category, r.error_message);
    return r.exit_code;
  }
  std::cout << r.summary_text;
  return kExitOk;
}

}  // namespace vdwlab::cli
