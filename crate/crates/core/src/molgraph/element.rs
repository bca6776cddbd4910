use std::fmt;

/// A chemical element, identified by atomic number.
///
/// Atomic number 0 is the attachment-point / wildcard pseudo element written `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Element(u8);

struct ElementInfo {
    symbol: &'static str,
    mass: f64,
}

// Periods 1-4 plus iodine. Average masses follow the conventional IUPAC values.
const TABLE: &[ElementInfo] = &[
    ElementInfo { symbol: "*", mass: 0.0 },
    ElementInfo { symbol: "H", mass: 1.008 },
    ElementInfo { symbol: "He", mass: 4.003 },
    ElementInfo { symbol: "Li", mass: 6.941 },
    ElementInfo { symbol: "Be", mass: 9.012 },
    ElementInfo { symbol: "B", mass: 10.812 },
    ElementInfo { symbol: "C", mass: 12.011 },
    ElementInfo { symbol: "N", mass: 14.007 },
    ElementInfo { symbol: "O", mass: 15.999 },
    ElementInfo { symbol: "F", mass: 18.998 },
    ElementInfo { symbol: "Ne", mass: 20.180 },
    ElementInfo { symbol: "Na", mass: 22.990 },
    ElementInfo { symbol: "Mg", mass: 24.305 },
    ElementInfo { symbol: "Al", mass: 26.982 },
    ElementInfo { symbol: "Si", mass: 28.086 },
    ElementInfo { symbol: "P", mass: 30.974 },
    ElementInfo { symbol: "S", mass: 32.067 },
    ElementInfo { symbol: "Cl", mass: 35.453 },
    ElementInfo { symbol: "Ar", mass: 39.948 },
    ElementInfo { symbol: "K", mass: 39.098 },
    ElementInfo { symbol: "Ca", mass: 40.078 },
    ElementInfo { symbol: "Sc", mass: 44.956 },
    ElementInfo { symbol: "Ti", mass: 47.867 },
    ElementInfo { symbol: "V", mass: 50.944 },
    ElementInfo { symbol: "Cr", mass: 51.996 },
    ElementInfo { symbol: "Mn", mass: 54.938 },
    ElementInfo { symbol: "Fe", mass: 55.845 },
    ElementInfo { symbol: "Co", mass: 58.933 },
    ElementInfo { symbol: "Ni", mass: 58.693 },
    ElementInfo { symbol: "Cu", mass: 63.546 },
    ElementInfo { symbol: "Zn", mass: 65.390 },
    ElementInfo { symbol: "Ga", mass: 69.723 },
    ElementInfo { symbol: "Ge", mass: 72.610 },
    ElementInfo { symbol: "As", mass: 74.922 },
    ElementInfo { symbol: "Se", mass: 78.960 },
    ElementInfo { symbol: "Br", mass: 79.904 },
    ElementInfo { symbol: "Kr", mass: 83.800 },
];

const IODINE: u8 = 53;
const IODINE_MASS: f64 = 126.904;

impl Element {
    pub const DUMMY: Element = Element(0);
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const SE: Element = Element(34);
    pub const AS: Element = Element(33);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(IODINE);

    /// Returns the element for a supported atomic number.
    pub fn from_atomic_number(z: u8) -> Option<Element> {
        if (z as usize) < TABLE.len() || z == IODINE {
            Some(Element(z))
        } else {
            None
        }
    }

    /// Looks up a capitalised element symbol (`"Cl"`, `"C"`, `"*"`).
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        if symbol == "I" {
            return Some(Element::I);
        }
        TABLE
            .iter()
            .position(|e| e.symbol == symbol)
            .map(|z| Element(z as u8))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        if self.0 == IODINE {
            "I"
        } else {
            TABLE[self.0 as usize].symbol
        }
    }

    pub fn mass(self) -> f64 {
        if self.0 == IODINE {
            IODINE_MASS
        } else {
            TABLE[self.0 as usize].mass
        }
    }

    pub fn is_dummy(self) -> bool {
        self.0 == 0
    }

    pub fn is_hydrogen(self) -> bool {
        self.0 == 1
    }

    /// Members of the SMILES organic subset may be written without brackets.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | IODINE)
    }

    /// Elements that may carry a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }

    pub fn is_halogen(self) -> bool {
        matches!(self.0, 9 | 17 | 35 | IODINE)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_lookup_round_trips() {
        for z in 0..=36u8 {
            let e = Element::from_atomic_number(z).unwrap();
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("I"), Some(Element::I));
        assert_eq!(Element::from_symbol("Xe"), None);
        assert_eq!(Element::from_atomic_number(54), None);
    }

    #[test]
    fn organic_subset() {
        assert!(Element::CL.is_organic_subset());
        assert!(!Element::SE.is_organic_subset());
        assert!(Element::SE.can_be_aromatic());
    }
}
