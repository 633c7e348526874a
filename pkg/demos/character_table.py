"""The 128-element symmetry group of the four-coordinate problem.

Generates the group from its coordinate actions, splits it into
conjugacy classes and prints the exact character table (entries in Z[√2]).
"""

from coulomb2d.symmetry import character_table, generate_group, physical_representations, quotient_order


def main():
    G = generate_group()
    table = character_table(G)
    print(f"|G| = {len(G)}; quotient by the coordinate-duplication symmetries has order {quotient_order(G)}")
    print(table.format())
    print("\none-dimensional representations realized by physical states:")
    for p in physical_representations(table):
        print(f"  row {p['row']:2d}: Πx={p['Pi_x']:+d} Πy={p['Pi_y']:+d} P12={p['P12']:+d}")


if __name__ == "__main__":
    main()
