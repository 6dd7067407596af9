//! Short content fingerprints for configurations and artifacts.

use alloc::string::String;
use core::fmt::Write;
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of `canonical`.
pub fn fingerprint(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_sensitive() {
        assert_eq!(fingerprint("a=1"), fingerprint("a=1"));
        assert_ne!(fingerprint("a=1"), fingerprint("a=2"));
        assert_eq!(fingerprint("").len(), 16);
        // sha256("") = e3b0c44298fc1c14...
        assert_eq!(fingerprint(""), "e3b0c44298fc1c14");
    }
}
