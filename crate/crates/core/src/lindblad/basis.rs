use crate::error::{invalid, Result};

/// Ordered state basis of the cascade: `|0⟩, |X_H⟩, |X_V⟩, |DE⟩, |XX⟩, |3X⟩, …, |nX⟩`.
///
/// Index `k ≥ 5` holds the multiexciton of order `k − 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateBasis {
    n_max: usize,
}

impl StateBasis {
    pub const EMPTY: usize = 0;
    pub const EXCITON_H: usize = 1;
    pub const EXCITON_V: usize = 2;
    pub const DARK: usize = 3;
    pub const BIEXCITON: usize = 4;

    /// Basis truncated at multiexciton order `n_max` (at least 2, the biexciton).
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(invalid(format!("n_max must be >= 2, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 3
    }

    /// Basis index of the multiexciton of the given order (2 is the biexciton).
    pub fn multiexciton_index(&self, order: usize) -> Option<usize> {
        (2..=self.n_max).contains(&order).then_some(order + 2)
    }

    /// Multiexciton order of a ladder state at or above the biexciton.
    pub fn order_of(&self, index: usize) -> Option<usize> {
        (Self::BIEXCITON..self.dim()).contains(&index).then_some(index - 2)
    }

    pub fn label(&self, index: usize) -> String {
        match index {
            Self::EMPTY => "G0".to_string(),
            Self::EXCITON_H => "XH".to_string(),
            Self::EXCITON_V => "XV".to_string(),
            Self::DARK => "DE".to_string(),
            Self::BIEXCITON => "XX".to_string(),
            k => format!("M{}", k - 2),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|k| self.label(k)).collect()
    }
}
