"""Singly excited Rydberg series below the first ionization threshold.

Quantum defects are nearly constant along a series; their sign tells
whether the outer electron sees more or less screening than hydrogenic.
"""

from coulomb2d.assembly import build_problem
from coulomb2d.basis import enumerate_basis
from coulomb2d.hamiltonian import SystemParams
from coulomb2d.spectra import rydberg_table


def main(nbase=80, count=4):
    for M_L, symmetry in ((0, "singlet"), (0, "triplet"), (1, "singlet"), (1, "triplet")):
        P = build_problem(SystemParams.helium(), enumerate_basis(M_L, symmetry, nbase))
        print(f"M_L={M_L} {symmetry}")
        for level in rydberg_table(P, 0.4, count):
            print(f"   {str(level.label):10s} E = {level.energy:.10f}  delta = {level.defect:+.4f}")


if __name__ == "__main__":
    main()
