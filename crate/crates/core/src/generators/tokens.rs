//! SMILES tokenization for the language model.

/// Splits SMILES into tokens; bracket atoms, `Cl`, `Br` and `%nn` ring
/// closures stay whole.
pub fn tokenize(smiles: &str) -> Vec<&str> {
    let b = smiles.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let len = match b[i] {
            b'[' => smiles[i..].find(']').map(|e| e + 1).unwrap_or(b.len() - i),
            b'C' if b.get(i + 1) == Some(&b'l') => 2,
            b'B' if b.get(i + 1) == Some(&b'r') => 2,
            b'%' if b.len() >= i + 3 && b[i + 1].is_ascii_digit() && b[i + 2].is_ascii_digit() => 3,
            _ => smiles[i..].chars().next().map(char::len_utf8).unwrap_or(1),
        };
        out.push(&smiles[i..i + len]);
        i += len;
    }
    out
}
