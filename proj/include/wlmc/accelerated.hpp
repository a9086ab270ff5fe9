#pragma once

#include "wlmc/engine.hpp"
#include "wlmc/quadrature.hpp"
#include "wlmc/sojourn.hpp"

namespace wlmc::accelerated {

/// Per-run state for the segment-MGF estimator: the Gauss-Laguerre rule in
/// u = s^2 (weight sqrt(u) e^-u) and one MGF table per kept node, holding the
/// scaled Laplace argument S_i = u_i * chi / N, which is the only combination
/// the segment MGFs are ever evaluated at.  Nodes whose quadrature weight is
/// below 1e-16 are dropped (their contribution is bounded by the weight).
struct MgfContext {
  quadrature::GaussRule rule;
  std::vector<double> node_weight;  // (1/2) * w_i of kept nodes
  std::vector<sojourn::MgfTable> tables;
  double build_seconds = 0.0;
};

MgfContext build_mgf_context(double chi, std::size_t n_steps, int s_nodes,
                             const sojourn::MgfTable::Spec& table_spec);
inline MgfContext build_mgf_context(double chi, std::size_t n_steps, int s_nodes = 64) {
  return build_mgf_context(chi, n_steps, s_nodes, sojourn::MgfTable::Spec{});
}

/// Casimir-Polder estimate with each segment's exponential factor replaced by
/// its bridge-ensemble average (the sojourn MGF), then the s integral done by
/// quadrature.  For a single planar interface the result has no finite-N
/// discretization error.  T is importance sampled from an inverse-gamma
/// density with the engine's power-law tail but full (0, inf) support, since
/// the MGF-averaged integrand has no exact first-touch cutoff.
engine::RunResult estimate_cp_mgf_segments(const engine::RunConfig& cfg, double atom_position,
                                           const MgfContext& ctx);
engine::RunResult estimate_cp_mgf_segments(const engine::RunConfig& cfg, double atom_position,
                                           int s_nodes = 64);

/// Casimir-Polder estimate with each segment's sojourn time drawn exactly
/// from its conditional law (inverse-CDF tables): the path average
/// <eps> = 1 + chi * (sum T_s,j)/T is then unbiased in N for a planar
/// interface.  Supports the Dirichlet marker (integrand -1 iff any segment
/// sojourns).
engine::RunResult estimate_cp_sojourn_sampled(const engine::RunConfig& cfg, double atom_position,
                                              const sojourn::SojournTables& tables);

}  // namespace wlmc::accelerated
