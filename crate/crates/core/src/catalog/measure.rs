use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FresnelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureAtom {
    pub point: Vec<f64>,
    pub weight: Complex64,
}

/// A finite complex combination of Dirac masses on R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteMeasure {
    pub dim: usize,
    pub atoms: Vec<MeasureAtom>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<MeasureAtom>) -> Result<Self> {
        let m = DiscreteMeasure { dim, atoms };
        m.validate()?;
        Ok(m.canonical())
    }

    pub fn single(point: Vec<f64>, weight: Complex64) -> Self {
        DiscreteMeasure { dim: point.len(), atoms: vec![MeasureAtom { point, weight }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(FresnelError::InvalidParameter("measure dimension must be >= 1".into()));
        }
        for a in &self.atoms {
            if a.point.len() != self.dim {
                return Err(FresnelError::DimensionMismatch { expected: self.dim, got: a.point.len() });
            }
            if !a.point.iter().all(|v| v.is_finite()) || !(a.weight.re.is_finite() && a.weight.im.is_finite()) {
                return Err(FresnelError::InvalidParameter("measure atoms must be finite".into()));
            }
        }
        Ok(())
    }

    /// Merges atoms sitting at bit-identical points and drops zero weights.
    /// Atom order follows first appearance.
    pub fn canonical(&self) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut atoms: Vec<MeasureAtom> = Vec::new();
        for a in &self.atoms {
            let key: Vec<u64> = a.point.iter().map(|v| (v + 0.0).to_bits()).collect();
            match index.get(&key) {
                Some(&j) => atoms[j].weight += a.weight,
                None => {
                    index.insert(key, atoms.len());
                    atoms.push(MeasureAtom { point: a.point.iter().map(|v| v + 0.0).collect(), weight: a.weight });
                }
            }
        }
        atoms.retain(|a| a.weight != Complex64::new(0.0, 0.0));
        DiscreteMeasure { dim: self.dim, atoms }
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.norm()).sum()
    }

    /// `x -> sum_j w_j exp(i p_j . x)`.
    pub fn fourier_at(&self, x: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| {
                let phase: f64 = a.point.iter().zip(x).map(|(p, y)| p * y).sum();
                a.weight * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Product measure on R^(d1 + d2).
    pub fn product(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(MeasureAtom {
                    point: [a.point.clone(), b.point.clone()].concat(),
                    weight: a.weight * b.weight,
                });
            }
        }
        DiscreteMeasure { dim: self.dim + other.dim, atoms }
    }

    /// Image under the projection onto the first `k` coordinates.
    pub fn project(&self, k: usize) -> DiscreteMeasure {
        let k = k.min(self.dim);
        DiscreteMeasure {
            dim: k,
            atoms: self
                .atoms
                .iter()
                .map(|a| MeasureAtom { point: a.point[..k].to_vec(), weight: a.weight })
                .collect(),
        }
        .canonical()
    }
}
