// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "vdwlab/cli.hpp"
#include "vdwlab/operators.hpp"
#include "vdwlab/vdw.hpp"

using namespace vdwlab;
using cli::json;

namespace {

const std::filesystem::path kOut = std::filesystem::temp_directory_path() / "vdwlab_acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

cli::RunResult run_cli(const std::string& command, json flags) {
  flags["out_dir"] = kOut.string();
  if (!flags.contains("name")) flags["name"] = command;
  const cli::RunResult r = cli::run(cli::resolve(command, nullptr, flags));
  if (r.exit_code != cli::kExitOk)
    throw std::runtime_error(command + " exited with " + std::to_string(r.exit_code) + ": " +
                             r.error_message);
  return r;
}

// criterion 1 -------------------------------------------------------------

// <psi, T psi> for a normalized Gaussian exp(-r^2 / 2 s^2) in the continuum,
// from its momentum density ~ k^2 exp(-k^2 s^2).
double gaussian_pr_kinetic(double s) {
  using boost::math::quadrature::gauss_kronrod;
  const double kmax = 40.0 / s;
  auto w = [s](double k) { return k * k * std::exp(-k * k * s * s); };
  const double num = gauss_kronrod<double, 61>::integrate(
      [&](double k) { return w(k) * k * k / (std::sqrt(k * k + 1.0) + 1.0); }, 0.0, kmax, 15, 1e-14);
  const double den = gauss_kronrod<double, 61>::integrate(w, 0.0, kmax, 15, 1e-14);
  return num / den;
}

Outcome criterion1() {
  Outcome o;
  for (double w : {0.5, 1.0, 2.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec g{3, 64, 12.0 * w, 1};
    const WaveFunction psi = WaveFunction::sample(g, [w](std::span<const double> x) {
                               return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) /
                                                    (2.0 * w * w)),
                                           0.0);
                             }).normalized();
    const double fft = kinetic_form(KineticKind::PseudoRelativistic, psi);
    const double ker = kinetic_form_kernel(psi);
    const double dt = seconds_since(t0);
    const double rel = std::abs(fft - ker) / fft;
    const double ref = gaussian_pr_kinetic(w);
    o.check(rel <= 1e-3, "width " + fmt("%g", w) + " kernel vs FFT " + fmt("%.2e", rel));
    o.check(std::abs(fft - ref) / ref <= 1e-3, "width " + fmt("%g", w) + " FFT vs radial oracle");
    o.check(std::abs(ker - ref) / ref <= 1e-3, "width " + fmt("%g", w) + " kernel vs radial oracle");
    o.check(dt <= 60.0, "width " + fmt("%g", w) + " runtime " + fmt("%.1f s", dt));
    o.note("w=" + fmt("%g", w) + " rel " + fmt("%.2e", rel) + " (continuum " +
           fmt("%.1e", std::abs(fft - ref) / ref) + ") in " + fmt("%.1fs", dt));
  }
  return o;
}

// criterion 2 -------------------------------------------------------------

Outcome criterion2() {
  Outcome o;
  const json r = run_cli("verify-localization", json::object()).summary.at("results");
  const double C = r.at("C").get<double>();
  for (const auto& row : r.at("shell")) {
    const double rho = row.at("rho").get<double>();
    const double le = row.at("localization_error").get<double>();
    const double chi = row.at("shell_norm2").get<double>();
    o.check(std::abs(le) <= C * chi / (rho * rho) * (1.0 + 1e-12), "shell bound at rho " + fmt("%g", rho));
    o.check(le != 0.0, "shell localization error is nonzero at rho " + fmt("%g", rho));
  }
  const double spread = r.at("shell_ratio_spread").get<double>();
  o.check(spread <= 1.5, "one C fits rho^-2 across the grid (spread " + fmt("%.3f", spread) + ")");
  const double Cf = r.at("C_far").get<double>();
  for (const auto& row : r.at("far")) {
    const double rho = row.at("rho").get<double>();
    const double le = row.at("localization_error").get<double>();
    const double nn = row.at("norm2").get<double>();
    o.check(std::abs(le) <= Cf * std::exp(-rho / 64.0) * nn * (1.0 + 1e-12) + 1e-300,
            "far bound at rho " + fmt("%g", rho));
  }
  o.check(r.at("far_relative_to_kinetic").get<double>() <= 1e-12,
          "far localization error at roundoff level");
  o.note("C " + fmt("%.4g", C) + ", spread " + fmt("%.3f", spread) + ", C' " + fmt("%.3g", Cf));
  return o;
}

// criterion 3 -------------------------------------------------------------

Outcome criterion3() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 2; k <= 5; ++k) {
    const json r = run_cli("verify-multipole", {{"k", k}, {"name", "multipole_k" + std::to_string(k)}})
                       .summary.at("results");
    const double slope = r.at("slope").get<double>();
    o.check(std::abs(slope + (k + 1)) <= 0.05, "k=" + std::to_string(k) + " slope " + fmt("%.4f", slope));
    o.note("k=" + std::to_string(k) + " slope " + fmt("%.4f", slope));
    if (k == 2) {
      o.check(r.at("f0_cancellation").get<double>() <= 1e-12, "f0 cancellation");
      o.check(r.at("f1_max").get<double>() <= 1e-12, "f1 vanishes");
      o.check(r.at("f2_closed_vs_legendre").get<double>() <= 1e-10, "f2 closed form");
      o.check(r.at("f3_closed_vs_legendre").get<double>() <= 1e-10, "f3 closed form");
    }
  }
  // hand-checked values: electrons at z = 1 in both clusters, e_D = z
  ClusterPair p;
  p.positions_1 = {{0.0, 0.0, 1.0}};
  p.positions_2 = {{0.0, 0.0, 1.0}};
  o.check(std::abs(f_n(p, 2) + 2.0) <= 1e-14, "f2 = -2 e^2 u1 u2 example");
  p.positions_2 = {{0.0, 0.0, 2.0}};
  o.check(std::abs(f_n(p, 3) - 6.0) <= 1e-13, "f3 = 3 e^2 u1 u2 (u2 - u1) example");
  const double dt = seconds_since(t0);
  o.check(dt <= 10.0, "runtime " + fmt("%.1f s", dt));
  return o;
}

// criterion 4 -------------------------------------------------------------

Outcome criterion4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (const json& dir : {json::array({0.0, 0.0, 1.0}), json::array({0.36, 0.48, 0.8})}) {
    const json r = run_cli("verify-orthogonality", {{"direction", dir}}).summary.at("results");
    for (const auto& e : r.at("entries"))
      o.check(e.at("relative").get<double>() <= 1e-8, e.at("name").get<std::string>());
    o.check(r.at("entries").size() == 9, "nine inner products");
    // London: identical oscillators, a1 = 3 omega alpha^2 / 4 with alpha = 1/omega^2
    o.check(std::abs(r.at("a1").get<double>() - 0.75) <= 1e-12, "a1 of identical oscillators");
    o.note("max relative " + fmt("%.2e", r.at("max_relative").get<double>()));
  }
  const double dt = seconds_since(t0);
  o.check(dt <= 120.0, "runtime " + fmt("%.1f s", dt));
  return o;
}

// criterion 5 -------------------------------------------------------------

Outcome criterion5(std::vector<double>& residuals) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (const char* kin : {"nonrelativistic", "pseudo-relativistic"}) {
    const json r = run_cli("dimer-scan", {{"kinetic", kin}, {"name", std::string("dimer_") + kin}})
                       .summary.at("results");
    const std::string tag = std::string(kin) + ": ";
    const double s6 = r.at("dispersion_slope").get<double>();
    const double s8 = r.at("residual_slope").get<double>();
    const double c6 = r.at("C6").get<double>(), a1 = r.at("a1").get<double>();
    o.check(std::abs(s6 + 6.0) <= 0.15, tag + "dispersion slope " + fmt("%.4f", s6));
    o.check(std::abs(s8 + 8.0) <= 0.3, tag + "residual slope " + fmt("%.4f", s8));
    o.check(std::abs(c6 - a1) / a1 <= 0.05, tag + "C6 vs a1");
    const auto& pts = r.at("points");
    o.check(pts.size() == 10, tag + "ten separations");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = pts[i].at("dispersion").get<double>();
      o.check(d > 0.0, tag + "dispersion energy positive");
      if (i > 0) o.check(d < pts[i - 1].at("dispersion").get<double>(), tag + "dispersion decreasing");
      residuals.push_back(pts[i].at("residual").get<double>());
    }
    o.note(tag + "slope " + fmt("%.3f", s6) + ", residual slope " + fmt("%.3f", s8) + ", C6 " +
           fmt("%.5g", c6) + " vs a1 " + fmt("%.5g", a1));
  }
  const double dt = seconds_since(t0);
  o.check(dt <= 900.0, "runtime " + fmt("%.1f s", dt));
  return o;
}

// criterion 6 -------------------------------------------------------------

// Dense third-order energy by sums over the exact eigenbasis of H0.
double third_order_sos(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& V) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H0);
  const Eigen::MatrixXd U = es.eigenvectors();
  const Eigen::VectorXd E = es.eigenvalues();
  const Eigen::MatrixXd W = U.transpose() * V * U;
  double s = 0.0, t = 0.0;
  for (Eigen::Index m = 1; m < E.size(); ++m) {
    t += W(0, m) * W(m, 0) / ((E[0] - E[m]) * (E[0] - E[m]));
    for (Eigen::Index n = 1; n < E.size(); ++n)
      s += W(0, m) * W(m, n) * W(n, 0) / ((E[0] - E[m]) * (E[0] - E[n]));
  }
  return s - W(0, 0) * t;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double gap = 0.8, dip = 0.6, e2 = 1.0, side = 3.0;
  const std::array<Vec3, 3> x{{{0, 0, 0}, {side, 0, 0}, {0.5 * side, 0.5 * std::sqrt(3.0) * side, 0}}};

  // dipoles along z, perpendicular to every pair axis: f2 = e^2 z_k z_l
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2), z = Eigen::MatrixXd::Zero(2, 2);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  h(1, 1) = gap;
  z(0, 1) = z(1, 0) = dip;
  auto k3 = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
    return Eigen::MatrixXd(Eigen::kroneckerProduct(Eigen::MatrixXd(Eigen::kroneckerProduct(a, b)), c));
  };
  const Eigen::MatrixXd H0 = k3(h, I, I) + k3(I, h, I) + k3(I, I, h);
  const double g = e2 / std::pow(side, 3);
  const Eigen::MatrixXd V = g * (k3(z, z, I) + k3(I, z, z) + k3(z, I, z));
  const double oracle = third_order_sos(H0, V) * std::pow(side, 9);

  const cli::RunResult rr = run_cli("vdw-c9", {{"gap", gap}, {"dipole", dip}, {"side", side}});
  const double a3 = rr.summary.at("results").at("a3").get<double>();
  const double rel = std::abs(a3 - oracle) / std::abs(oracle);
  o.check(rel <= 1e-8, "a3 vs third-order oracle " + fmt("%.2e", rel));
  o.check(oracle > 0.0, "equilateral triple-dipole term is repulsive");

  const ProductBasis basis({two_level_atom(gap, dip), two_level_atom(gap, dip), two_level_atom(gap, dip)});
  for (int p = 0; p < 3; ++p) {
    std::array<double, 3> s{1.0, 1.0, 1.0};
    s[static_cast<std::size_t>(p)] = 0.0;
    o.check(compute_a3(basis, x, e2, s) == 0.0, "zeroed coupling " + std::to_string(p) + " gives 0");
  }
  const double dt = seconds_since(t0);
  o.check(dt <= 1.0, "runtime " + fmt("%.2f s", dt));
  o.note("a3 " + fmt("%.12g", a3) + " oracle " + fmt("%.12g", oracle));
  return o;
}

// criterion 7 -------------------------------------------------------------

Outcome criterion7(std::vector<double>& residuals) {
  Outcome o;
  const json r = run_cli("verify-decay", json::object()).summary.at("results");
  for (const auto& s : r.at("states")) {
    const int i = s.at("index").get<int>();
    const double b = s.at("rate_b").get<double>(), fr = s.at("fit_residual").get<double>();
    o.check(b > 0.0, "state " + std::to_string(i) + " rate positive");
    o.check(fr < 0.05, "state " + std::to_string(i) + " fit residual " + fmt("%.3g", fr));
    residuals.push_back(s.at("residual").get<double>());
    o.note("state " + std::to_string(i) + " b " + fmt("%.4f", b) + " res " + fmt("%.3g", fr));
  }
  const double err = r.at("synthetic_relative_error").get<double>();
  o.check(err <= 1e-3, "synthetic exponential " + fmt("%.2e", err));
  return o;
}

// criterion 8 -------------------------------------------------------------

Outcome criterion8(std::vector<double>& residuals) {
  Outcome o;
  const json r = run_cli("verify-ionization", json::object()).summary.at("results");
  const auto E = r.at("energies").get<std::vector<double>>();
  o.check(E.size() == 2, "two ladder energies");
  if (E.size() == 2) {
    o.check(E[0] < 0.0, "E1 < 0");
    o.check(E[1] < E[0], "E2 < E1");
  }
  const auto p = r.at("probe_energies").get<std::vector<double>>();
  const double thr = r.at("threshold").get<double>();
  o.check(p.size() == 4, "three doublings");
  for (std::size_t i = 0; i < p.size(); ++i) {
    o.check(p[i] > thr, "probe above threshold");
    if (i > 0) o.check(p[i] < p[i - 1], "probe energies decrease");
  }
  for (double x : r.at("residuals").get<std::vector<double>>()) residuals.push_back(x);
  o.note("E1 " + fmt("%.10g", E.empty() ? 0.0 : E[0]) + ", E2 " + fmt("%.10g", E.size() > 1 ? E[1] : 0.0) +
         ", probe gap " + fmt("%.3g", p.empty() ? 0.0 : p.back() - thr));
  return o;
}

// criterion 9 -------------------------------------------------------------

Outcome criterion9(const std::vector<double>& residuals) {
  Outcome o;
  const json r = run_cli("vdw-c6", {{"model", "grid"}, {"n_keep", 40}}).summary.at("results");
  std::vector<double> all = residuals;
  for (double x : r.at("eigen_residuals").get<std::vector<double>>()) all.push_back(x);
  const json a = run_cli("atom-solve", {{"dim", 3}, {"points", 32}, {"box", 16.0}, {"states", 5},
                                        {"softening", 0.1}, {"kinetic", "pseudo-relativistic"},
                                        {"e2", 0.5}})
                     .summary.at("results");
  for (double x : a.at("residuals").get<std::vector<double>>()) all.push_back(x);
  const double worst = *std::max_element(all.begin(), all.end());
  o.check(worst <= 1e-8, "largest eigenpair residual " + fmt("%.2e", worst));
  const auto& c = r.at("truncation_curve");
  for (std::size_t i = 1; i < c.size(); ++i)
    o.check(c[i].at("a1").get<double>() >= c[i - 1].at("a1").get<double>(), "truncation curve nondecreasing");
  o.note(std::to_string(all.size()) + " eigenpairs, worst residual " + fmt("%.2e", worst));
  std::string curve;
  for (const auto& e : c) curve += (curve.empty() ? "" : ", ") + fmt("%.6g", e.at("a1").get<double>());
  o.note("a1 curve " + curve);
  return o;
}

// criterion 10 ------------------------------------------------------------

Outcome criterion10() {
  Outcome o;
  const std::vector<std::pair<std::string, json>> runs{
      {"verify-multipole", {{"k", 3}}},
      {"verify-orthogonality", json::object()},
      {"dimer-scan", {{"kinetic", "pseudo-relativistic"}}},
      {"vdw-c9", json::object()}};
  for (const auto& [cmd, flags] : runs) {
    json f1 = flags, f2 = flags;
    f1["name"] = cmd + "_first";
    f2["name"] = cmd + "_first";
    const std::string a = run_cli(cmd, f1).summary_text;
    const std::string b = run_cli(cmd, f2).summary_text;
    o.check(a == b, cmd + " summaries identical");
  }
  return o;
}

}  // namespace

int main() {
  std::filesystem::create_directories(kOut);
  std::vector<double> residuals;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 kinetic kernel equivalence", criterion1},
      {"2 localization error shape", criterion2},
      {"3 multipole identities", criterion3},
      {"4 orthogonality battery", criterion4},
      {"5 dimer law", [&] { return criterion5(residuals); }},
      {"6 three-body term", criterion6},
      {"7 exponential decay", [&] { return criterion7(residuals); }},
      {"8 ionization and HVZ threshold", [&] { return criterion8(residuals); }},
      {"9 solver contract", [&] { return criterion9(residuals); }},
      {"10 determinism", criterion10}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", name, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
