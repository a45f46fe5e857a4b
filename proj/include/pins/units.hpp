#pragma once

// Atomic units throughout: hbar = 1, energies in hartree, lengths in bohr,
// masses in electron masses (m_e). Temperatures enter only through
// beta = 1/(k_B T).

namespace pins::units {

inline constexpr double u_to_me = 1822.888486209;       // unified amu -> m_e
inline constexpr double kb_hartree_per_k = 3.166811563e-6;
inline constexpr double planck_h = 6.283185307179586476925287;  // h = 2*pi when hbar = 1

inline constexpr double beta_from_temperature(double t_kelvin)
{
    return 1.0 / (kb_hartree_per_k * t_kelvin);
}

inline constexpr double mass_me_from_u(double mass_u)
{
    return mass_u * u_to_me;
}

}  // namespace pins::units
