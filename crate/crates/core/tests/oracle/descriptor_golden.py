"""Regenerates tests/data/descriptor_golden.tsv with RDKit.

Counts are computed from RDKit's graph (atoms, hydrogens, ring membership,
bond types) using the crate's definitions:

  hbd   N or O atoms carrying at least one hydrogen
  hba   N plus O atoms
  rot   acyclic single bonds between heavy atoms that each have at least
        two heavy neighbours, excluding the C-N bond of an amide
  mw    RDKit average molecular weight (implicit hydrogens included)

Usage: python3 descriptor_golden.py ../../data/nci_1k.smi > ../data/descriptor_golden.tsv
"""

import sys

from rdkit import Chem, RDLogger
from rdkit.Chem import Descriptors

RDLogger.DisableLog("rdApp.*")


def heavy_degree(atom):
    return sum(1 for n in atom.GetNeighbors() if n.GetAtomicNum() > 1)


def is_carbonyl_carbon(atom):
    if atom.GetSymbol() != "C":
        return False
    for bond in atom.GetBonds():
        other = bond.GetOtherAtom(atom)
        if other.GetSymbol() == "O" and bond.GetBondType() == Chem.BondType.DOUBLE:
            return True
    return False


def is_amide_cn(a, b):
    return (a.GetSymbol() == "N" and is_carbonyl_carbon(b)) or (b.GetSymbol() == "N" and is_carbonyl_carbon(a))


def rotatable(mol):
    count = 0
    for bond in mol.GetBonds():
        a, b = bond.GetBeginAtom(), bond.GetEndAtom()
        if bond.GetBondType() != Chem.BondType.SINGLE or bond.IsInRing():
            continue
        if a.GetAtomicNum() <= 1 or b.GetAtomicNum() <= 1:
            continue
        if heavy_degree(a) < 2 or heavy_degree(b) < 2:
            continue
        if is_amide_cn(a, b):
            continue
        count += 1
    return count


def row(smiles):
    mol = Chem.MolFromSmiles(smiles)
    if mol is None:
        return None
    # amide detection needs Kekulé double bonds
    kekule = Chem.Mol(mol)
    Chem.Kekulize(kekule, clearAromaticFlags=False)
    no = [a for a in mol.GetAtoms() if a.GetSymbol() in ("N", "O")]
    hbd = sum(1 for a in no if a.GetTotalNumHs() > 0)
    return (smiles, Descriptors.MolWt(mol), hbd, len(no), rotatable(kekule))


def main(path):
    lines = [l.split("\t")[0].strip() for l in open(path) if l.strip() and not l.startswith("#")]
    picked = lines[::10]
    print("smiles\tmw\thbd\thba\trotatable_bonds")
    for smi in picked:
        r = row(smi)
        if r is None:
            continue
        print(f"{r[0]}\t{r[1]:.4f}\t{r[2]}\t{r[3]}\t{r[4]}")


if __name__ == "__main__":
    main(sys.argv[1])
