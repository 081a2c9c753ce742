//! Element table: standard atomic weights (IUPAC, three decimals), valence
//! electron counts and default SMILES valences.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub symbol: &'static str,
    pub atomic_number: u8,
    pub mass: f64,
    pub valence_electrons: u8,
    /// Allowed valences for implicit-hydrogen assignment, lowest first.
    /// Empty for elements outside the organic subset.
    pub default_valences: &'static [u8],
}

macro_rules! el {
    ($sym:literal, $z:literal, $mass:literal, $ve:literal, [$($v:literal),*]) => {
        Element {
            symbol: $sym,
            atomic_number: $z,
            mass: $mass,
            valence_electrons: $ve,
            default_valences: &[$($v),*],
        }
    };
}

pub static ELEMENTS: &[Element] = &[
    el!("H", 1, 1.008, 1, []),
    el!("He", 2, 4.003, 2, []),
    el!("Li", 3, 6.941, 1, []),
    el!("Be", 4, 9.012, 2, []),
    el!("B", 5, 10.811, 3, [3]),
    el!("C", 6, 12.011, 4, [4]),
    el!("N", 7, 14.007, 5, [3, 5]),
    el!("O", 8, 15.999, 6, [2]),
    el!("F", 9, 18.998, 7, [1]),
    el!("Ne", 10, 20.180, 8, []),
    el!("Na", 11, 22.990, 1, []),
    el!("Mg", 12, 24.305, 2, []),
    el!("Al", 13, 26.982, 3, []),
    el!("Si", 14, 28.086, 4, []),
    el!("P", 15, 30.974, 5, [3, 5]),
    el!("S", 16, 32.065, 6, [2, 4, 6]),
    el!("Cl", 17, 35.453, 7, [1]),
    el!("Ar", 18, 39.948, 8, []),
    el!("K", 19, 39.098, 1, []),
    el!("Ca", 20, 40.078, 2, []),
    el!("Mn", 25, 54.938, 7, []),
    el!("Fe", 26, 55.845, 8, []),
    el!("Co", 27, 58.933, 9, []),
    el!("Ni", 28, 58.693, 10, []),
    el!("Cu", 29, 63.546, 11, []),
    el!("Zn", 30, 65.380, 12, []),
    el!("Ge", 32, 72.630, 4, []),
    el!("As", 33, 74.922, 5, []),
    el!("Se", 34, 78.971, 6, []),
    el!("Br", 35, 79.904, 7, [1]),
    el!("Kr", 36, 83.798, 8, []),
    el!("Rb", 37, 85.468, 1, []),
    el!("Sr", 38, 87.620, 2, []),
    el!("Ag", 47, 107.868, 11, []),
    el!("Sn", 50, 118.710, 4, []),
    el!("Sb", 51, 121.760, 5, []),
    el!("Te", 52, 127.600, 6, []),
    el!("I", 53, 126.904, 7, [1]),
    el!("Xe", 54, 131.293, 8, []),
    el!("Cs", 55, 132.905, 1, []),
    el!("Ba", 56, 137.327, 2, []),
    el!("Pt", 78, 195.084, 10, []),
    el!("Au", 79, 196.967, 11, []),
    el!("Hg", 80, 200.592, 12, []),
    el!("Bi", 83, 208.980, 5, []),
];

pub fn lookup(symbol: &str) -> Option<&'static Element> {
    ELEMENTS.iter().find(|e| e.symbol == symbol)
}

pub fn hydrogen() -> &'static Element {
    &ELEMENTS[0]
}

/// Elements that may be written in lowercase (aromatic) form.
pub(crate) fn aromatic_capable(symbol: &str) -> bool {
    matches!(symbol, "B" | "C" | "N" | "O" | "P" | "S" | "Se" | "As")
}
