"""Build the regularized Hamiltonian pieces as ladder polynomials.

Prints term counts, checks hermiticity, and counts the occupation shifts
the operators can produce (the coupling rules that fix the sparsity).
"""

from coulomb2d.algebra import adjoint, shift_signature, term_count
from coulomb2d.hamiltonian import OperatorKind, build_operator

EXCHANGE_SYMMETRIC = [OperatorKind.T1_PLUS_T2, OperatorKind.R1R12_PLUS_R2R12,
                      OperatorKind.R1R2, OperatorKind.T12, OperatorKind.B]


def main():
    for kind in OperatorKind:
        op = build_operator(kind)
        print(f"{kind.name:18s} terms={term_count(op):5d} degree={op.degree:2d} "
              f"hermitian={adjoint(op) == op}")

    rules = set()
    for kind in EXCHANGE_SYMMETRIC:
        rules |= shift_signature(build_operator(kind))
    by_type = {}
    for d in rules:
        by_type[d[0] - d[1]] = by_type.get(d[0] - d[1], 0) + 1
    print(f"\n{len(rules)} exchange-preserving coupling rules, split by δn1-δn2: {dict(sorted(by_type.items()))}")


if __name__ == "__main__":
    main()
