//! Rule of Five.

use serde::{Deserialize, Serialize};

use crate::molgraph::DescriptorVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ro5Result {
    pub violations: u8,
    pub pass: bool,
}

pub const MAX_MW: f64 = 500.0;
pub const MAX_LOGP: f64 = 5.0;
pub const MAX_HBD: usize = 5;
pub const MAX_HBA: usize = 10;

/// Counts violations; passes with at most one.
pub fn ro5(desc: &DescriptorVector) -> Ro5Result {
    ro5_with(desc, 1)
}

pub fn ro5_with(desc: &DescriptorVector, max_violations: u8) -> Ro5Result {
    let violations = (desc.mw > MAX_MW) as u8
        + (desc.logp_est > MAX_LOGP) as u8
        + (desc.hbd > MAX_HBD) as u8
        + (desc.hba > MAX_HBA) as u8;
    Ro5Result { violations, pass: violations <= max_violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{descriptors, mol_from_smiles};

    #[test]
    fn methane_passes() {
        let r = ro5(&descriptors(&mol_from_smiles("C").unwrap()).unwrap());
        assert_eq!(r, Ro5Result { violations: 0, pass: true });
    }

    #[test]
    fn boundaries_are_inclusive() {
        let mut d = descriptors(&mol_from_smiles("C").unwrap()).unwrap();
        d.mw = 500.0;
        assert_eq!(ro5(&d).violations, 0);
        d.mw = 600.0;
        d.hbd = 6;
        assert_eq!(ro5(&d), Ro5Result { violations: 2, pass: false });
        assert!(!ro5_with(&DescriptorVector { hbd: 6, ..d.clone() }, 0).pass);
    }
}
