//! Flexibility from the 2D graph: 0 for rigid, towards 1 for floppy.

use crate::molgraph::DescriptorVector;

pub fn flex(desc: &DescriptorVector) -> f64 {
    desc.rotatable_bonds as f64 / (desc.heavy_atoms.saturating_sub(1)).max(1) as f64
}
