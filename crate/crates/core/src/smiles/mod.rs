//! SMILES parsing and structural descriptors.

mod descriptors;
pub mod elements;
mod parser;

pub use descriptors::{compute_descriptors, DescriptorVector, DESCRIPTOR_NAMES};
pub use parser::{
    parse_smiles, Atom, Bond, BondOrder, MolecularGraph, SmilesError, SmilesErrorKind,
};

/// Parses `smiles` and computes its descriptor vector in one step.
pub fn descriptors_for(smiles: &str) -> Result<DescriptorVector, SmilesError> {
    parse_smiles(smiles).map(|g| compute_descriptors(&g))
}
