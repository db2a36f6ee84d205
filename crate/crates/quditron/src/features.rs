//! Monomial feature maps for the two activation ansätze.
//!
//! The multivariable variant enumerates every monomial of total degree ≤ L
//! over p inputs (C(L+p, p) features including the constant); the
//! univariate-powers variant uses only per-coordinate powers
//! (1 + L·p features). Enumeration order is graded (degree ascending), then
//! lexicographic on the exponent index tuple, constant first — fixed so that
//! weight vectors and model files are reproducible.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

/// Which expansion the activation ansatz uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Full degree-≤L multivariable monomial basis.
    Multivariable,
    /// Per-coordinate powers x_j^g only, g = 1…L.
    UnivariatePowers,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Multivariable => f.write_str("multivariable"),
            Variant::UnivariatePowers => f.write_str("univariate_powers"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multivariable" => Ok(Variant::Multivariable),
            "univariate_powers" | "univariate-powers" => Ok(Variant::UnivariatePowers),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown feature variant `{other}`"),
            }),
        }
    }
}

/// Specification of a degree-L monomial expansion over p inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub p: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub variant: Variant,
}

impl FeatureMap {
    pub fn new(p: usize, l: usize, variant: Variant) -> Result<Self> {
        if p < 1 || l < 1 {
            return Err(Error::InvalidConfig {
                reason: format!("feature map requires p >= 1 and L >= 1, got p={p}, L={l}"),
            });
        }
        Ok(FeatureMap { p, l, variant })
    }
}

/// A monomial in canonical form: a non-decreasing multiset of variable
/// indices. The empty multiset is the constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonomialIndex(pub Vec<usize>);

impl MonomialIndex {
    pub fn degree(&self) -> usize {
        self.0.len()
    }
}

/// Number of features the map produces, constant term included.
pub fn feature_count(map: &FeatureMap) -> Result<usize> {
    match map.variant {
        Variant::Multivariable => binomial(map.l + map.p, map.p),
        Variant::UnivariatePowers => map
            .l
            .checked_mul(map.p)
            .and_then(|v| v.checked_add(1))
            .ok_or(Error::Overflow {
                context: "univariate feature count",
            }),
    }
}

/// C(n, k) with overflow detection.
fn binomial(n: usize, k: usize) -> Result<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        // exact at every step: acc holds C(n−?, ·) progressively
        acc = acc.checked_mul(n - i).ok_or(Error::Overflow {
            context: "binomial coefficient",
        })? / (i + 1);
    }
    Ok(acc)
}

/// Enumerates the monomials of `map` in graded-lex order, constant first.
pub fn enumerate_monomials(map: &FeatureMap) -> Result<Vec<MonomialIndex>> {
    let count = feature_count(map)?;
    let mut out = Vec::with_capacity(count);
    out.push(MonomialIndex(Vec::new()));
    match map.variant {
        Variant::Multivariable => {
            for degree in 1..=map.l {
                // odometer over non-decreasing index tuples
                let mut combo = vec![0usize; degree];
                loop {
                    out.push(MonomialIndex(combo.clone()));
                    let mut pos = degree;
                    while pos > 0 && combo[pos - 1] == map.p - 1 {
                        pos -= 1;
                    }
                    if pos == 0 {
                        break;
                    }
                    let v = combo[pos - 1] + 1;
                    for slot in combo.iter_mut().skip(pos - 1) {
                        *slot = v;
                    }
                }
            }
        }
        Variant::UnivariatePowers => {
            for degree in 1..=map.l {
                for j in 0..map.p {
                    out.push(MonomialIndex(vec![j; degree]));
                }
            }
        }
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// Precomputed evaluation plan for a feature map.
///
/// Every non-constant monomial factors as (prefix monomial) × (one extra
/// variable), and the prefix always appears earlier in graded-lex order, so
/// expansion is one multiply per output feature.
#[derive(Debug, Clone)]
pub struct MonomialTable {
    map: FeatureMap,
    /// (prefix feature index, variable index) per non-constant feature.
    steps: Vec<(u32, u32)>,
}

impl MonomialTable {
    pub fn build(map: &FeatureMap) -> Result<Self> {
        let monomials = enumerate_monomials(map)?;
        let mut position = std::collections::HashMap::with_capacity(monomials.len());
        for (i, m) in monomials.iter().enumerate() {
            position.insert(m.0.clone(), i);
        }
        let mut steps = Vec::with_capacity(monomials.len() - 1);
        for m in &monomials[1..] {
            let (last, prefix) = m.0.split_last().expect("non-constant monomial");
            let parent = position[prefix];
            steps.push((parent as u32, *last as u32));
        }
        Ok(MonomialTable { map: *map, steps })
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn feature_count(&self) -> usize {
        self.steps.len() + 1
    }

    /// Expands one input vector; entry 0 is the constant 1.
    pub fn expand(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.feature_count()];
        self.expand_into(x, &mut out)?;
        Ok(out)
    }

    pub fn expand_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.map.p {
            return Err(Error::DimensionMismatch {
                context: "feature expansion input",
                expected: self.map.p,
                got: x.len(),
            });
        }
        debug_assert_eq!(out.len(), self.feature_count());
        out[0] = 1.0;
        for (i, &(parent, var)) in self.steps.iter().enumerate() {
            out[i + 1] = out[parent as usize] * x[var as usize];
        }
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "feature expansion output",
            });
        }
        Ok(())
    }

    /// Expands a batch of rows into an n×feature_count matrix (rows in
    /// parallel, deterministic output).
    pub fn expand_batch(&self, x: &Matrix) -> Result<Matrix> {
        use rayon::prelude::*;
        let n = x.rows();
        let m = self.feature_count();
        let mut data = vec![0.0; n * m];
        data.par_chunks_mut(m)
            .enumerate()
            .try_for_each(|(i, out)| self.expand_into(x.row(i), out))?;
        Ok(Matrix::from_vec(n, m, data))
    }
}

/// One-shot expansion of a single vector.
pub fn expand(map: &FeatureMap, x: &[f64]) -> Result<Vec<f64>> {
    MonomialTable::build(map)?.expand(x)
}
