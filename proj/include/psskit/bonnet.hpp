#pragma once

// Concrete solutions on an (x, t) grid, the moving frame of the immersion,
// discrete curvature and mesh export.

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "psskit/families.hpp"
#include "psskit/immersion.hpp"

namespace psskit {

class BonnetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Grid {
  double x0 = 0, t0 = 0;
  double hx = 0.01, ht = 0.01;
  int nx = 1, nt = 1;
  double x(int i) const { return x0 + i * hx; }
  double t(int j) const { return t0 + j * ht; }
};

/// Jets of a solution at one point: u[i] = d^i u/dx^i (i <= 3), ut[i] = d/dt u[i].
struct NodeJets {
  double u[4] = {0, 0, 0, 0};
  double ut[3] = {0, 0, 0};
};

JetSample to_jet_sample(const NodeJets& n, double x, double t);

enum class Provenance { TravelingWave, SgKink, Tabulated };
std::string to_string(Provenance p);

class SolutionSampler {
 public:
  Grid grid;
  Provenance provenance = Provenance::Tabulated;
  std::string label;
  double tolerance = 1e-8;
  double max_residual = 0;  // measured at construction

  /// Jets anywhere in the grid rectangle (analytic, dense or interpolated).
  NodeJets jets(double x, double t) const { return eval_(x, t); }
  NodeJets node(int i, int j) const { return eval_(grid.x(i), grid.t(j)); }

  /// Table of nodes, bilinearly interpolated between them; validated
  /// against the PDE of `pde`.
  static SolutionSampler tabulated(const Grid& g, std::vector<NodeJets> nodes, const PdeSpec& pde,
                                   double tolerance = 1e-8);
  /// From a callable; validated at every node.
  static SolutionSampler from_function(const Grid& g, Provenance p, std::string label,
                                       std::function<NodeJets(double, double)> f, const PdeSpec& pde,
                                       double tolerance);

 private:
  std::function<NodeJets(double, double)> eval_;
};

/// Residual of the PDE at one point.
double pde_residual(const PdeSpec& pde, const NodeJets& n);

/// u = 4 arctan(exp(a x + t/a)), a solution of u_xt = sin u.
SolutionSampler sg_kink(double a, const Grid& grid);

struct TravelingWaveOptions {
  double abs_tol = 1e-13, rel_tol = 1e-13;
  double max_step = 0.01;
  double tolerance = 1e-8;  // PDE residual accepted at the nodes
};

/// u = U(x - c t) for a third-order instance; U solves
/// (c - lambda U^2) U''' = c U' + G(U, U', U'').
SolutionSampler traveling_wave(const FamilyInstance& inst, double c, double xi0, double U0, double U1, double U2,
                               const Grid& grid, const TravelingWaveOptions& opt = {});

/// (a, b, c) from the jets at a point.
using SffField = std::function<std::array<double, 3>(const JetSample&)>;

SffField sff_field(const SecondFundamentalForm& sff);
SffField constant_sff(double a, double b, double c);
/// (a, b, c) = (-2 s cot u, s, 0) for the sine-Gordon frame, s = +-1; it
/// gives II = 2 s sin u dx dt.
SffField sine_gordon_sff(int s = 1);

struct FrameState {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Matrix3d e = Eigen::Matrix3d::Identity();  // rows e1, e2, e3
  double drift() const;  // max |Gram - I|
};

struct SurfaceMesh {
  Grid grid;
  std::vector<FrameState> frames;  // index i + nx j
  std::vector<std::array<double, 3>> sff;
  std::vector<double> curvature;  // NaN on the boundary
  std::vector<double> drift;
  double max_drift = 0;
  double commutation_defect = 0;  // far corner, x-then-t against t-then-x

  const FrameState& at(int i, int j) const { return frames[std::size_t(i + grid.nx * j)]; }
  std::size_t index(int i, int j) const { return std::size_t(i + grid.nx * j); }
};

struct FrameOptions {
  double drift_threshold = 1e-6;
  bool reorthonormalize = false;
  double gauss_tolerance = 1e-8;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// RK4 along t = t0, then along every x = const line.
SurfaceMesh integrate_frame(const SolutionSampler& s, const FamilyInstance& inst, const SffField& sff,
                            const FrameOptions& opt = {});

/// Angle deficit over one third of the incident area at interior vertices.
std::vector<double> discrete_curvature(const SurfaceMesh& mesh);

/// Median over interior vertices; NaN when there are none.
double median_interior_curvature(const SurfaceMesh& mesh);

/// max over grid edges of | |dr| - length from I = w1^2 + w2^2 |.
double edge_length_defect(const SurfaceMesh& mesh, const SolutionSampler& s, const FamilyInstance& inst);

enum class MeshFormat { Obj, Csv };
void write_obj(const SurfaceMesh& mesh, std::ostream& out);
void write_csv(const SurfaceMesh& mesh, std::ostream& out);
/// Throws BonnetError on I/O failure.
void export_mesh(const SurfaceMesh& mesh, MeshFormat format, const std::string& path);

}  // namespace psskit
