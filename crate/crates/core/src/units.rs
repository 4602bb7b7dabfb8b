use serde::{Deserialize, Serialize};

/// Unit system carried explicitly through every operation that touches ħ or m.
///
/// Defaults to atomic units (ħ = 1, m_e = 1); any consistent system works as
/// long as the caller keeps inputs in the same system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0 }
    }
}

impl Units {
    pub fn atomic() -> Self {
        Self::default()
    }

    pub fn new(hbar: f64, mass: f64) -> Self {
        Units { hbar, mass }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_defaults() {
        let u = Units::default();
        assert_eq!(u.hbar, 1.0);
        assert_eq!(u.mass, 1.0);
        assert_eq!(Units::atomic(), u);
    }
}
