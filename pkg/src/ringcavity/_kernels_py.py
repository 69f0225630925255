"""Pure-Python/NumPy versions of the hot kernels.

Signatures and results match the compiled ``_kernels`` module exactly; this
module is used when the extension is not built or when
``RINGCAVITY_PURE_PYTHON=1``.
"""

import numpy as np


def fock_hamiltonian(n_spins, cutoff, g_cw, g_ccw, omega_c, spin_energy):
    """Dense RWA Hamiltonian on the truncated two-mode Fock basis.

    Coupling terms are ``g_cw[m] a_cw^+ S-_m + g_ccw[m] a_ccw^+ S-_m + h.c.``.
    """
    n = n_spins
    levels = cutoff + 1
    dim = levels * levels << n
    idx = np.arange(dim)
    photons = idx >> n
    n_cw = photons // levels
    n_ccw = photons % levels
    bits = idx & ((1 << n) - 1)

    H = np.zeros((dim, dim), dtype=np.complex128)
    shifts = n - 1 - np.arange(n)
    occ = (bits[:, None] >> shifts[None, :]) & 1
    H[idx, idx] = omega_c * (n_cw + n_ccw) + occ @ np.asarray(spin_energy, dtype=float)

    for m in range(n):
        flag = 1 << (n - 1 - m)
        excited = (bits & flag) != 0
        # a_cw^+ S-_m : n_cw -> n_cw + 1, spin m 1 -> 0
        src = idx[excited & (n_cw < cutoff)]
        dst = src + (levels << n) - flag
        amp = g_cw[m] * np.sqrt(n_cw[src] + 1.0)
        H[dst, src] += amp
        H[src, dst] += np.conj(amp)
        src = idx[excited & (n_ccw < cutoff)]
        dst = src + (1 << n) - flag
        amp = g_ccw[m] * np.sqrt(n_ccw[src] + 1.0)
        H[dst, src] += amp
        H[src, dst] += np.conj(amp)
    return H


def propagate(unitaries, psi0, record):
    """Apply ``unitaries[k]`` in order; return the state after each recorded step."""
    psi = np.array(psi0, dtype=np.complex128)
    out = np.empty((int(np.count_nonzero(record)), psi.size), dtype=np.complex128)
    r = 0
    for k in range(unitaries.shape[0]):
        psi = unitaries[k] @ psi
        if record[k]:
            out[r] = psi
            r += 1
    return out
