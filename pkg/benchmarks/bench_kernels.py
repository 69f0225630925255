"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times Fock-Hamiltonian assembly and unitary-stack propagation for a few sizes
and checks that both backends return identical arrays.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ringcavity import kernels
from ringcavity.model import BasisSpec, SystemSpec, build_coupling_matrix


def _fock_case(n, cutoff):
    G = build_coupling_matrix(SystemSpec.chain(n, 0.7)).matrix
    args = (n, cutoff, np.ascontiguousarray(G[0]), np.ascontiguousarray(G[1]), 0.1, np.linspace(-1, 1, n))
    return f"fock_hamiltonian N={n} M={cutoff} dim={BasisSpec.fock(n, cutoff).dim}", "fock_hamiltonian", args


def _propagate_case(dim, steps, stride=10):
    rng = np.random.default_rng(0)
    H = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = H + H.conj().T
    E, V = np.linalg.eigh(H)
    U = (V * np.exp(-1e-3j * E)) @ V.conj().T
    Us = np.ascontiguousarray(np.broadcast_to(U, (steps, dim, dim)))
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1
    record = np.zeros(steps, dtype=bool)
    record[stride - 1 :: stride] = True
    return f"propagate dim={dim} steps={steps}", "propagate", (Us, psi, record)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    impls = kernels.implementations()
    if "cython" not in impls:
        print("compiled extension not built; only the NumPy backend is available")
    cases = [_fock_case(4, 8), _fock_case(6, 4), _fock_case(8, 4),
             _propagate_case(6, 10_000), _propagate_case(36, 5_000), _propagate_case(144, 1_000)]
    print(f"{'case':45s} " + " ".join(f"{name:>12s}" for name in impls) + "   speedup")
    for label, fn, fargs in cases:
        times, outputs = {}, {}
        for name, mod in impls.items():
            f = getattr(mod, fn)
            outputs[name] = f(*fargs)
            times[name] = min(timeit.repeat(lambda: f(*fargs), number=1, repeat=args.repeat))
        ref = outputs["python"]
        for name, out in outputs.items():
            if not np.allclose(out, ref, rtol=0, atol=1e-12):
                raise SystemExit(f"{name} disagrees with the NumPy backend on {label}")
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else ""
        print(f"{label:45s} " + " ".join(f"{times[n] * 1e3:10.2f}ms" for n in impls) + f" {speed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
