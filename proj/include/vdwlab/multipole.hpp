#pragma once

// Multipole expansion of the interaction between two clusters of electrons
// bound to nuclei X1, X2 = X1 + |D| e_D. Electron coordinates are taken
// relative to their own nucleus. Exact Coulomb kernels throughout.

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <vector>

namespace vdwlab {

using Vec3 = std::array<double, 3>;

/// Legendre polynomial by the three-term recurrence. Throws DomainError
/// for |z| > 1 + 1e-12; arguments within that slack are clamped.
double legendre(int n, double z);

struct ClusterPair {
  std::vector<Vec3> positions_1;  // electrons of C1, relative to X1
  std::vector<Vec3> positions_2;  // electrons of C2, relative to X2
  int Z1 = 1;
  int Z2 = 1;
  double e2 = 1.0;
  Vec3 direction{0.0, 0.0, 1.0};  // e_D
  double separation = 1.0;        // |D|

  void validate() const;
  bool neutral() const {
    return static_cast<int>(positions_1.size()) == Z1 &&
           static_cast<int>(positions_2.size()) == Z2;
  }
};

/// f_n = -e^2 Z2 F1_n - e^2 Z1 F2_n + e^2 F3_n with
/// F1_n = sum_i |x_i|^n P_n(x_i.e/|x_i|), F2_n = sum_j |x_j|^n P_n(-x_j.e/|x_j|),
/// F3_n = sum_ij |x_i - x_j|^n P_n((x_i - x_j).e/|x_i - x_j|).
double f_n(const ClusterPair& pair, int n);

/// Closed forms of f_2 and f_3 for neutral pairs (ModelError otherwise).
double f2_closed(const ClusterPair& pair);
double f3_closed(const ClusterPair& pair);

/// Intercluster Coulomb interaction: electron-nucleus, electron-electron and
/// nucleus-nucleus terms between the clusters.
double intercluster_interaction(const ClusterPair& pair);

/// d_beta(x) = (sum over all electrons of |x_i|^2)^(1/2).
double d_beta(const ClusterPair& pair);

struct MultipoleSet {
  std::vector<int> orders;
  std::vector<double> values;
  double d_beta = 0.0;
  double separation = 0.0;
};

MultipoleSet multipole_set(const ClusterPair& pair, int max_order);

/// I_beta - e^2 Z1 Z2/|D| - sum_{n<k} f_n/|D|^(n+1).
double multipole_remainder(const ClusterPair& pair, int k);

struct RemainderRow {
  double D = 0.0;
  double max_R = 0.0;
  double bound = 0.0;
};

struct RemainderReport {
  int k = 0;
  std::vector<RemainderRow> rows;
  double slope = 0.0;     // least-squares log-log slope of max_R against D
  double constant = 0.0;  // max of R |D|^(k+1) / d_beta^k
};

/// Remainder of the order-k truncated expansion for each configuration of
/// `family` placed at every separation of `D_grid` (the separation and
/// direction stored in the family members are replaced by D). Throws
/// DomainError when a configuration has d_beta > D_min / 4.
RemainderReport remainder_check(const std::vector<ClusterPair>& family, int k,
                                const std::vector<double>& D_grid);

/// CSV with columns D,max_R_k,bound_value.
void write_remainder_csv(const RemainderReport& report, const std::filesystem::path& path);

enum class ParityWhich { C1, C2, C1C2 };

ClusterPair parity_apply(ParityWhich which, const ClusterPair& pair);

using ConfigFunction = std::function<double(const ClusterPair&)>;

/// (P f)(x) = f(P x).
ConfigFunction parity_apply(ParityWhich which, ConfigFunction f);

/// Polynomial in the six coordinates (x1, y1, z1, x2, y2, z2) of one electron
/// per cluster, keyed by exponents.
using Exponents6 = std::array<int, 6>;
using Poly6 = std::map<Exponents6, double>;

/// f_n for single-electron clusters with Z1 = Z2 = 1 as an explicit
/// polynomial (homogeneous of degree n). Terms below |coef| 1e-15 dropped.
Poly6 pair_polynomial(int n, const Vec3& direction, double e2);

double evaluate(const Poly6& p, const Vec3& x1, const Vec3& x2);

}  // namespace vdwlab
