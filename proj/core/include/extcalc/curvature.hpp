#ifndef EXTCALC_CURVATURE_HPP
#define EXTCALC_CURVATURE_HPP

// Torsion, static and dynamic curvature, the Theta and Omega contraction
// tensors, and the commutation-relation verification harness.
//
// Slot orders:
//   torsion   (1,2): (k; i, j), antisymmetric in (i, j)
//   static_R  (1,3): (k; h, i, j), antisymmetric in (i, j)
//   dynamic_D[P]: uppers (k, kb), lowers (i, j, hb) where i is the acted
//       index of Gamma^k_{j i}, j the direction, and (hb; kb) the slot-P
//       fiber variable the derivative was taken against
//   theta_PR[P][R]: uppers (ib, kb), lowers (jb, j, hb); (ib; jb) shaped
//       like T[R], (hb; kb) like the slot-P variable, j the direction
//   omega_R[R]: uppers (ib), lowers (i, j, jb)

#include <string>
#include <vector>

#include "extcalc/connection.hpp"

namespace extcalc {

ExtField torsion(const ExtendedConnection& conn);
ExtField static_curvature(const ExtendedConnection& conn);
ExtField dynamic_curvature(const ExtendedConnection& conn, int P);       // P 1-based
ExtField theta_tensor(const ExtendedConnection& conn, int P, int R);     // 1-based
ExtField omega_tensor(const ExtendedConnection& conn, int R);            // 1-based

struct CurvaturePack {
    ExtField torsion;
    ExtField static_R;
    std::vector<ExtField> dynamic_D;
    std::vector<std::vector<ExtField>> theta_PR;
    std::vector<ExtField> omega_R;
};

CurvaturePack curvature_pack(const ExtendedConnection& conn);

// contraction wrappers S = D[P](X,Y), U[R] = Theta[P,R](X,Y),
// S = R(X,Y), V = T(X,Y), U[R] = Omega[R](X,Y)
ExtField contract_dynamic(const ExtField& D, const BundleSpec& spec, int P, const ExtField& X,
                          const ExtField& Y);
ExtField contract_theta(const ExtField& Th, const BundleSpec& spec, int P, int R, const ExtField& X,
                        const ExtField& Y);
ExtField contract_static(const ExtField& R, const ExtField& X, const ExtField& Y);
ExtField contract_torsion(const ExtField& T, const ExtField& X, const ExtField& Y);
ExtField contract_omega(const ExtField& Om, const BundleSpec& spec, int R, const ExtField& X,
                        const ExtField& Y);

// ---------------------------------------------------------------------------
// Commutation-relation harness
// ---------------------------------------------------------------------------

struct CommutatorTestSet {
    ExtField scalar;             // (0,0)
    ExtField vector;             // (1,0)
    ExtField covector;           // (0,1)
    ExtField dirX, dirY;         // (1,0) directions
    std::vector<ExtField> dirT;  // per P: slot-shaped directions
    ExtField S1, S2;             // (1,1) operands for the degenerate pair
};

struct RelationResidual {
    std::string relation;  // "15.1", "15.3", "15.5", "15.13", "16.1".."16.7"
    std::string detail;    // which operand/slots the entry covers
    int probe = 0;
    double residual = 0.0;
};

/// Every relation checked by honest nested application on the left and the
/// curvature/torsion/Theta/Omega assembly on the right, per probe.
std::vector<RelationResidual> verify_commutators(const ExtendedConnection& conn,
                                                 const CommutatorTestSet& fields,
                                                 const std::vector<FiberPointD>& probes);

}  // namespace extcalc

#endif
