//! Layout and storage of the auxiliary density operators.
//!
//! ADOs with `n1 + n2 <= depth` are stored contiguously, ordered by total
//! level and then by `n1`, sixteen complex entries each. Storage is in the
//! pointer basis (where both coupling operators are diagonal) and, when
//! rescaling is on, in balanced units; [`HierarchyState::ado`] converts back
//! to physical operators in the product basis.

use num_complex::Complex64 as C64;

use super::{HeomError, Result};
use crate::model::pointer_basis;
use crate::qstate::{Basis, ComplexMatrix, ZERO};

pub const ADO_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HierarchyIndex {
    pub n1: usize,
    pub n2: usize,
}

impl HierarchyIndex {
    pub const ROOT: HierarchyIndex = HierarchyIndex { n1: 0, n2: 0 };

    pub fn new(n1: usize, n2: usize) -> Self {
        Self { n1, n2 }
    }

    pub fn level(self) -> usize {
        self.n1 + self.n2
    }

    /// `n_l` for bath `l` in {0, 1}.
    pub fn count(self, bath: usize) -> usize {
        if bath == 0 {
            self.n1
        } else {
            self.n2
        }
    }

    pub fn raised(self, bath: usize) -> Self {
        if bath == 0 {
            Self::new(self.n1 + 1, self.n2)
        } else {
            Self::new(self.n1, self.n2 + 1)
        }
    }

    pub fn lowered(self, bath: usize) -> Option<Self> {
        match (bath, self.n1, self.n2) {
            (0, 0, _) | (1, _, 0) => None,
            (0, n1, n2) => Some(Self::new(n1 - 1, n2)),
            (_, n1, n2) => Some(Self::new(n1, n2 - 1)),
        }
    }
}

/// Number of ADOs kept at truncation depth `depth`.
pub fn ado_count(depth: usize) -> usize {
    (depth + 1) * (depth + 2) / 2
}

/// Position of an index in the flat ADO list, if within `depth`.
pub fn position(index: HierarchyIndex, depth: usize) -> Option<usize> {
    let level = index.level();
    (level <= depth).then(|| level * (level + 1) / 2 + index.n1)
}

pub fn index_at(position: usize) -> HierarchyIndex {
    // largest level with level(level+1)/2 <= position
    let mut level = ((((8 * position + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while level * (level + 1) / 2 > position {
        level -= 1;
    }
    while (level + 1) * (level + 2) / 2 <= position {
        level += 1;
    }
    let n1 = position - level * (level + 1) / 2;
    HierarchyIndex::new(n1, level - n1)
}

/// How stored ADOs relate to physical ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdoScaling {
    /// Stored ADOs are the physical ones.
    Unscaled,
    /// Stored `zeta~ = zeta * s1^n1 s2^n2 / sqrt(n1! n2!)`.
    Balanced([f64; 2]),
}

impl AdoScaling {
    /// Multiplier taking a stored ADO at `index` to the physical one.
    pub fn physical_factor(&self, index: HierarchyIndex) -> f64 {
        match self {
            AdoScaling::Unscaled => 1.0,
            AdoScaling::Balanced(s) => {
                let mut f = 1.0;
                for (bath, &sl) in s.iter().enumerate() {
                    for k in 1..=index.count(bath) {
                        f *= (k as f64).sqrt() / sl;
                    }
                }
                f
            }
        }
    }
}

/// Full set of auxiliary density operators at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyState {
    depth: usize,
    scaling: AdoScaling,
    data: Vec<C64>,
}

impl HierarchyState {
    pub fn zeros(depth: usize, scaling: AdoScaling) -> Result<Self> {
        if depth == 0 {
            return Err(HeomError::DepthTooSmall { depth, required: 1 });
        }
        Ok(Self { depth, scaling, data: vec![ZERO; ado_count(depth) * ADO_LEN] })
    }

    /// All ADOs zero except `zeta_00 = rho`.
    pub fn from_density(rho: &ComplexMatrix, depth: usize, scaling: AdoScaling) -> Result<Self> {
        let mut state = Self::zeros(depth, scaling)?;
        state.set_ado(HierarchyIndex::ROOT, rho)?;
        Ok(state)
    }

    pub(crate) fn from_raw(depth: usize, scaling: AdoScaling, data: Vec<C64>) -> Result<Self> {
        let expected = ado_count(depth) * ADO_LEN;
        if data.len() != expected {
            return Err(HeomError::DepthMismatch { expected: depth, got: data.len() / ADO_LEN });
        }
        Ok(Self { depth, scaling, data })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scaling(&self) -> AdoScaling {
        self.scaling
    }

    pub fn ado_count(&self) -> usize {
        ado_count(self.depth)
    }

    pub fn indices(&self) -> impl Iterator<Item = HierarchyIndex> {
        (0..self.ado_count()).map(index_at)
    }

    pub(crate) fn raw(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    fn slot(&self, index: HierarchyIndex) -> Result<usize> {
        position(index, self.depth)
            .map(|p| p * ADO_LEN)
            .ok_or(HeomError::IndexOutOfRange { n1: index.n1, n2: index.n2, depth: self.depth })
    }

    /// Physical ADO in the product basis.
    pub fn ado(&self, index: HierarchyIndex) -> Result<ComplexMatrix> {
        let at = self.slot(index)?;
        let f = self.scaling.physical_factor(index);
        let work = ComplexMatrix::from_vec(
            4,
            self.data[at..at + ADO_LEN].iter().map(|z| z * f).collect(),
        )?;
        Ok(work.from_basis(working_basis())?)
    }

    /// Stores a physical product-basis operator at `index`.
    pub fn set_ado(&mut self, index: HierarchyIndex, m: &ComplexMatrix) -> Result<()> {
        let at = self.slot(index)?;
        let f = self.scaling.physical_factor(index);
        let work = m.in_basis(working_basis())?;
        for (dst, src) in self.data[at..at + ADO_LEN].iter_mut().zip(work.as_slice()) {
            *dst = src / f;
        }
        Ok(())
    }

    /// The reduced density operator `zeta_00` in the product basis.
    pub fn rho(&self) -> ComplexMatrix {
        self.ado(HierarchyIndex::ROOT).expect("root always present")
    }

    /// Largest entry modulus over all stored ADOs.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }

    /// Stacks all physical ADOs (product basis, row-major) into one vector.
    pub fn to_physical_vector(&self) -> Vec<C64> {
        self.indices()
            .flat_map(|idx| self.ado(idx).expect("in range").into_vec())
            .collect()
    }

    pub fn from_physical_vector(depth: usize, scaling: AdoScaling, v: &[C64]) -> Result<Self> {
        let mut state = Self::zeros(depth, scaling)?;
        if v.len() != state.data.len() {
            return Err(HeomError::DepthMismatch { expected: depth, got: v.len() / ADO_LEN });
        }
        for (k, chunk) in v.chunks_exact(ADO_LEN).enumerate() {
            let m = ComplexMatrix::from_vec(4, chunk.to_vec())?;
            state.set_ado(index_at(k), &m)?;
        }
        Ok(state)
    }
}

/// Basis the engine works in: the pointer basis.
pub fn working_basis() -> &'static Basis {
    use std::sync::OnceLock;
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(pointer_basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts_and_order() {
        assert_eq!(ado_count(50), 1326);
        assert_eq!(ado_count(1), 3);
        let order: Vec<_> = (0..6).map(index_at).collect();
        assert_eq!(
            order,
            vec![
                HierarchyIndex::new(0, 0),
                HierarchyIndex::new(0, 1),
                HierarchyIndex::new(1, 0),
                HierarchyIndex::new(0, 2),
                HierarchyIndex::new(1, 1),
                HierarchyIndex::new(2, 0),
            ]
        );
        for p in 0..ado_count(60) {
            assert_eq!(position(index_at(p), 60), Some(p));
        }
        assert_eq!(position(HierarchyIndex::new(3, 2), 4), None);
    }

    #[test]
    fn neighbours() {
        let i = HierarchyIndex::new(2, 0);
        assert_eq!(i.lowered(1), None);
        assert_eq!(i.lowered(0), Some(HierarchyIndex::new(1, 0)));
        assert_eq!(i.raised(1), HierarchyIndex::new(2, 1));
    }

    #[test]
    fn physical_roundtrip() {
        let scaling = AdoScaling::Balanced([0.3, 2.0]);
        let mut s = HierarchyState::zeros(3, scaling).unwrap();
        let m = ComplexMatrix::from_fn(4, |i, j| C64::new(i as f64, j as f64 - 0.5)).unwrap();
        let idx = HierarchyIndex::new(2, 1);
        s.set_ado(idx, &m).unwrap();
        assert!(s.ado(idx).unwrap().max_abs_diff(&m).unwrap() < 1e-13);
        let f = scaling.physical_factor(idx);
        assert!((f - (2f64.sqrt() / 0.09) / 2.0).abs() < 1e-12);
        assert!(s.ado(HierarchyIndex::new(4, 0)).is_err());
    }

    #[test]
    fn depth_zero_rejected() {
        assert!(matches!(
            HierarchyState::zeros(0, AdoScaling::Unscaled),
            Err(HeomError::DepthTooSmall { .. })
        ));
    }
}
