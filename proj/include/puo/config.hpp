#pragma once

namespace puo {

#ifdef PUO_VERSION
inline constexpr const char* kVersion = PUO_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

// Exact-rational identities (Hamilton, bi-Hamilton, commutators) are checked at this level.
inline constexpr double EPS_ALGEBRA = 1e-12;
// Determinant / pivot gate for inverting Hessians and embedding Jacobians.
inline constexpr double EPS_SINGULAR = 1e-10;
// Relative cutoff on singular values when extracting null spaces.
inline constexpr double EPS_RANK = 1e-10;

// Signs of the alternative Hamiltonian pair, fixed by sign_search() over the four
// (q̈² sign, ∂q∧∂q̇ sign) combinations. Only this pair satisfies J₂∇H₂ = V.
inline constexpr int kH2AccelSign = +1;
inline constexpr int kJ2PositionVelocitySign = -1;

// Sign of W'(q) in the q⁽³⁾ component of the interacting flow (Lagrangian L - W).
inline constexpr int kInteractionSign = +1;

inline constexpr unsigned long long kDefaultSeed = 20250101ULL;

}  // namespace puo
