//! Molecular graph kernel: SMILES and molfile I/O, sanitization, canonical
//! output, fingerprints, descriptors, substructure search and fragmentation.

pub mod brics;
pub mod canon;
pub mod descriptors;
pub mod element;
pub mod error;
pub mod fingerprint;
pub mod mol;
pub mod molfile;
pub mod rings;
pub mod scaffold;
pub mod sanitize;
pub mod smarts;
pub mod smi;
pub mod smiles;

pub use brics::{brics_fragment, brics_recombine, reassemble, Attachment, BricsRules, Fragment};
pub use canon::{canonical_ranks, canonical_smiles, random_smiles, symmetry_classes, write_canonical, write_smiles};
pub use element::Element;
pub use error::{ChemError, GraphError, MolfileError, SanitizeError, SmartsError, SmilesError, SmilesErrorKind, RuleError};
pub use mol::{Atom, Bond, BondOrder, Chirality, Molecule, Neighbor};
pub use sanitize::{mol_from_smiles, sanitize};
pub use smiles::parse_smiles;
pub use descriptors::{descriptors, DescriptorVector};
pub use fingerprint::{fingerprint, morgan_fingerprint, similarity, tanimoto, Fingerprint, Metric};
pub use molfile::{parse_molfile, SdfReader};
pub use smarts::Pattern;
pub use scaffold::murcko_scaffold;
