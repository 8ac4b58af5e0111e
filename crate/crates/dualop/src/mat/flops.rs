/// Work counter threaded through every kernel.
///
/// A fused multiply-add counts as one `multiply_adds` unit; divisions are
/// tallied separately because triangular solves are division-heavy while
/// GEMM/SYRK are not. Counts depend only on matrix structure and block
/// partitions, never on values or timing, so two runs over the same inputs
/// report identical numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlopCounter {
    pub multiply_adds: u64,
    pub divisions: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add_muladds(&mut self, n: u64) {
        self.multiply_adds += n;
    }

    #[inline]
    pub fn add_divisions(&mut self, n: u64) {
        self.divisions += n;
    }

    /// Accumulate another counter into this one.
    pub fn merge(&mut self, other: FlopCounter) {
        self.multiply_adds += other.multiply_adds;
        self.divisions += other.divisions;
    }

    /// Total operation count with each multiply-add and each division
    /// weighted as one unit.
    pub fn total(&self) -> u64 {
        self.multiply_adds + self.divisions
    }
}

impl std::ops::Add for FlopCounter {
    type Output = FlopCounter;
    fn add(self, rhs: FlopCounter) -> FlopCounter {
        FlopCounter {
            multiply_adds: self.multiply_adds + rhs.multiply_adds,
            divisions: self.divisions + rhs.divisions,
        }
    }
}
