//! Symmetry groups over state/action spaces and the checks that a given
//! environment/group pair actually forms a symmetric MDP.
//!
//! A transform is a pair of linear maps: one on observations, one on
//! actions. The built-in groups use signed permutations, which compose and
//! invert exactly in floating point, so the verifier can demand violations
//! at the 1e-9 level.

mod env;
mod verify;

pub use env::{Env, EnvSpec, StepResult};
pub use verify::{verify_mdp_symmetry, MdpSymmetryReport, TransformViolation};

use crate::error::{Error, Result};

/// Square real matrix acting on a state or action space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    dim: usize,
    /// Row-major `dim x dim`.
    data: Vec<f64>,
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        LinearMap { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::config("linear map must be square".to_string()));
        }
        Ok(LinearMap {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Diagonal map with the given signs, e.g. `[-1.0, 1.0]` for reflect-x.
    pub fn diag(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            data[i * dim + i] = e;
        }
        LinearMap { dim, data }
    }

    /// `-I`, the full sign flip.
    pub fn neg_identity(dim: usize) -> Self {
        Self::diag(&vec![-1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.data[row * self.dim + col]
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::config(format!(
                "linear map dim {} applied to vector of length {}",
                self.dim,
                v.len()
            )));
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = row.iter().zip(v.iter()).fold(0.0, |acc, (a, b)| acc + a * b);
        }
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.dim != other.dim {
            return Err(Error::config(format!(
                "cannot compose maps of dims {} and {}",
                self.dim, other.dim
            )));
        }
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a != 0.0 {
                    for j in 0..d {
                        data[i * d + j] += a * other.data[k * d + j];
                    }
                }
            }
        }
        Ok(LinearMap { dim: d, data })
    }

    /// Transpose; the inverse for orthogonal maps such as signed permutations.
    pub fn transpose(&self) -> LinearMap {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j];
            }
        }
        LinearMap { dim: d, data }
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let d = self.dim;
        let mut m = self.data.clone();
        let mut det = 1.0;
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&a, &b| {
                    m[a * d + col]
                        .abs()
                        .partial_cmp(&m[b * d + col].abs())
                        .unwrap()
                })
                .unwrap();
            if m[pivot * d + col].abs() < 1e-300 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..d {
                    m.swap(col * d + j, pivot * d + j);
                }
                det = -det;
            }
            det *= m[col * d + col];
            for row in col + 1..d {
                let f = m[row * d + col] / m[col * d + col];
                for j in col..d {
                    m[row * d + j] -= f * m[col * d + j];
                }
            }
        }
        det
    }

    pub fn is_invertible(&self, tol: f64) -> bool {
        self.det().abs() > tol
    }

    /// Each row and column has exactly one entry, and it is +/-1.
    pub fn is_signed_permutation(&self, tol: f64) -> bool {
        let d = self.dim;
        let mut col_used = vec![false; d];
        for i in 0..d {
            let mut found = 0;
            for j in 0..d {
                let e = self.data[i * d + j];
                if e.abs() > tol {
                    if (e.abs() - 1.0).abs() > tol || col_used[j] {
                        return false;
                    }
                    col_used[j] = true;
                    found += 1;
                }
            }
            if found != 1 {
                return false;
            }
        }
        true
    }

    pub fn max_abs_diff(&self, other: &LinearMap) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.max_abs_diff(&LinearMap::identity(self.dim)) <= tol
    }
}

/// A paired state/action transformation `(L_g, K_g)` with a label.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryTransform {
    pub name: String,
    pub state_map: LinearMap,
    pub action_map: LinearMap,
}

impl SymmetryTransform {
    pub fn new(name: impl Into<String>, state_map: LinearMap, action_map: LinearMap) -> Self {
        SymmetryTransform {
            name: name.into(),
            state_map,
            action_map,
        }
    }

    pub fn identity(obs_dim: usize, act_dim: usize) -> Self {
        SymmetryTransform::new(
            "identity",
            LinearMap::identity(obs_dim),
            LinearMap::identity(act_dim),
        )
    }

    /// `L_g s`.
    pub fn apply_state(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.state_map.apply(s)
    }

    /// `K_g a`.
    pub fn apply_action(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.action_map.apply(a)
    }

    /// `(L_g1 L_g2, K_g1 K_g2)` — apply `other` first, then `self`.
    pub fn compose(&self, other: &SymmetryTransform) -> Result<SymmetryTransform> {
        Ok(SymmetryTransform::new(
            format!("{}*{}", self.name, other.name),
            self.state_map.compose(&other.state_map)?,
            self.action_map.compose(&other.action_map)?,
        ))
    }
}

/// Ordered set of transforms; index 0 is the identity pair.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    transforms: Vec<SymmetryTransform>,
}

impl SymmetryGroup {
    pub fn new(transforms: Vec<SymmetryTransform>) -> Result<Self> {
        if transforms.is_empty() {
            return Err(Error::config("a symmetry group needs at least the identity"));
        }
        let (od, ad) = (
            transforms[0].state_map.dim(),
            transforms[0].action_map.dim(),
        );
        for t in &transforms {
            if t.state_map.dim() != od || t.action_map.dim() != ad {
                return Err(Error::config(format!(
                    "transform '{}' has mismatched dimensions",
                    t.name
                )));
            }
        }
        Ok(SymmetryGroup { transforms })
    }

    pub fn identity_only(obs_dim: usize, act_dim: usize) -> Self {
        SymmetryGroup {
            transforms: vec![SymmetryTransform::identity(obs_dim, act_dim)],
        }
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn transforms(&self) -> &[SymmetryTransform] {
        &self.transforms
    }

    pub fn transform(&self, i: usize) -> &SymmetryTransform {
        &self.transforms[i]
    }

    pub fn transforms_mut(&mut self) -> &mut [SymmetryTransform] {
        &mut self.transforms
    }

    pub fn obs_dim(&self) -> usize {
        self.transforms[0].state_map.dim()
    }

    pub fn act_dim(&self) -> usize {
        self.transforms[0].action_map.dim()
    }

    /// Structural checks: identity first, all maps invertible, closure under
    /// composition. Failures are reported, not raised.
    pub fn verify(&self, tol: f64) -> GroupReport {
        let mut checks = Vec::new();

        let id_ok = self.transforms[0].state_map.is_identity(tol)
            && self.transforms[0].action_map.is_identity(tol);
        checks.push(GroupCheck {
            name: "identity_first".to_string(),
            pass: id_ok,
            detail: if id_ok {
                "transforms[0] is the identity pair".to_string()
            } else {
                "transforms[0] is not the identity pair".to_string()
            },
        });

        for t in &self.transforms {
            let inv = t.state_map.is_invertible(tol) && t.action_map.is_invertible(tol);
            checks.push(GroupCheck {
                name: format!("invertible[{}]", t.name),
                pass: inv,
                detail: format!(
                    "det(L) = {:.3e}, det(K) = {:.3e}",
                    t.state_map.det(),
                    t.action_map.det()
                ),
            });
        }

        let mut closure_ok = true;
        let mut closure_detail = String::from("all pairwise compositions match a group element");
        'outer: for a in &self.transforms {
            for b in &self.transforms {
                let c = match a.compose(b) {
                    Ok(c) => c,
                    Err(e) => {
                        closure_ok = false;
                        closure_detail = e.to_string();
                        break 'outer;
                    }
                };
                let matched = self.transforms.iter().any(|t| {
                    t.state_map.max_abs_diff(&c.state_map) <= tol
                        && t.action_map.max_abs_diff(&c.action_map) <= tol
                });
                if !matched {
                    closure_ok = false;
                    closure_detail =
                        format!("composition {} * {} matches no group element", a.name, b.name);
                    break 'outer;
                }
            }
        }
        checks.push(GroupCheck {
            name: "closure".to_string(),
            pass: closure_ok,
            detail: closure_detail,
        });

        GroupReport { checks }
    }
}

/// One structural group check.
#[derive(Debug, Clone)]
pub struct GroupCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of [`SymmetryGroup::verify`].
#[derive(Debug, Clone)]
pub struct GroupReport {
    pub checks: Vec<GroupCheck>,
}

impl GroupReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&GroupCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}
