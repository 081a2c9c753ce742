use serde::{Deserialize, Serialize};

use super::elements;
use super::parser::{BondOrder, MolecularGraph};

/// The structurally computable descriptor subset, in output column order.
pub const DESCRIPTOR_NAMES: [&str; 16] = [
    "count_C",
    "count_N",
    "count_O",
    "count_P",
    "count_S",
    "count_F",
    "count_Cl",
    "count_Br",
    "count_I",
    "single_bonds",
    "double_bonds",
    "num_aromatic_atoms",
    "aromatic_proportion",
    "num_heteroatoms",
    "mol_wt",
    "num_valence_electrons",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DescriptorVector {
    pub count_c: f64,
    pub count_n: f64,
    pub count_o: f64,
    pub count_p: f64,
    pub count_s: f64,
    pub count_f: f64,
    pub count_cl: f64,
    pub count_br: f64,
    pub count_i: f64,
    pub single_bonds: f64,
    pub double_bonds: f64,
    pub num_aromatic_atoms: f64,
    pub aromatic_proportion: f64,
    pub num_heteroatoms: f64,
    /// Average molecular weight in unified atomic mass units, hydrogens included.
    pub mol_wt: f64,
    pub num_valence_electrons: f64,
}

impl DescriptorVector {
    /// Values in [`DESCRIPTOR_NAMES`] order.
    pub fn to_array(&self) -> [f64; 16] {
        [
            self.count_c,
            self.count_n,
            self.count_o,
            self.count_p,
            self.count_s,
            self.count_f,
            self.count_cl,
            self.count_br,
            self.count_i,
            self.single_bonds,
            self.double_bonds,
            self.num_aromatic_atoms,
            self.aromatic_proportion,
            self.num_heteroatoms,
            self.mol_wt,
            self.num_valence_electrons,
        ]
    }
}

/// Computes element counts, bond counts, aromaticity, weight and valence
/// electron count. Aromatic bonds count as neither single nor double.
pub fn compute_descriptors(g: &MolecularGraph) -> DescriptorVector {
    let mut d = DescriptorVector::default();
    let h = elements::hydrogen();
    let mut heavy = 0usize;
    let mut hydrogens = 0u32;
    let mut valence_electrons = 0i64;

    for atom in &g.atoms {
        d.mol_wt += atom.element.mass;
        valence_electrons += atom.element.valence_electrons as i64 - atom.charge as i64;
        hydrogens += atom.total_h();
        if !atom.is_heavy() {
            continue;
        }
        heavy += 1;
        if atom.aromatic {
            d.num_aromatic_atoms += 1.0;
        }
        if atom.element.symbol != "C" {
            d.num_heteroatoms += 1.0;
        }
        let slot = match atom.element.symbol {
            "C" => &mut d.count_c,
            "N" => &mut d.count_n,
            "O" => &mut d.count_o,
            "P" => &mut d.count_p,
            "S" => &mut d.count_s,
            "F" => &mut d.count_f,
            "Cl" => &mut d.count_cl,
            "Br" => &mut d.count_br,
            "I" => &mut d.count_i,
            _ => continue,
        };
        *slot += 1.0;
    }

    for bond in &g.bonds {
        match bond.order {
            BondOrder::Single => d.single_bonds += 1.0,
            BondOrder::Double => d.double_bonds += 1.0,
            BondOrder::Triple | BondOrder::Aromatic => {}
        }
    }

    d.mol_wt += hydrogens as f64 * h.mass;
    d.num_valence_electrons = (valence_electrons + hydrogens as i64) as f64;
    d.aromatic_proportion = if heavy > 0 {
        d.num_aromatic_atoms / heavy as f64
    } else {
        0.0
    };
    d
}
