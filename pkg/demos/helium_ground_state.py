"""Ground state of planar helium and its convergence with the basis size.

For each N_base the scale α is optimized variationally, then the
ground-state energy is compared with a high-precision reference value.
"""

import time

from coulomb2d.assembly import build_problem
from coulomb2d.basis import enumerate_basis
from coulomb2d.hamiltonian import SystemParams
from coulomb2d.spectra import optimize_alpha

REFERENCE = -11.899822342953


def main(sizes=(40, 60, 80)):
    print(" N_base   size   alpha         E0            error    seconds")
    for nbase in sizes:
        t0 = time.perf_counter()
        P = build_problem(SystemParams.helium(), enumerate_basis(0, "singlet", nbase))
        alpha, E0 = optimize_alpha(P, shift=-12.5, bounds=(0.3, 0.6))
        dt = time.perf_counter() - t0
        print(f"{nbase:7d} {P.dimension:6d}  {alpha:.4f}  {E0:.12f}  {abs(E0 - REFERENCE):.1e}  {dt:7.1f}")


if __name__ == "__main__":
    main()
