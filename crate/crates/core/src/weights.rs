//! Generator weights and the triangular polytope they live in.

use serde::{Deserialize, Serialize};

use crate::aux::AuxGroup;
use crate::error::{Error, Result};
use crate::group::{Gen, Word};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// A weight per generator, normalized to sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn uniform(n: usize) -> Self {
        Weights(vec![1.0 / n as f64; n])
    }

    /// Wraps a vector without any check; callers are expected to have
    /// validated it against [`Constraints`].
    pub fn from_vec_unchecked(v: Vec<f64>) -> Self {
        Weights(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, s: Gen) -> f64 {
        self.0[s as usize]
    }

    /// `(syllables, weighted length)` of a word.
    pub fn length(&self, w: &[Gen]) -> (usize, f64) {
        (w.len(), w.iter().map(|&s| self.0[s as usize]).sum())
    }

    pub fn weighted(&self, w: &Word) -> f64 {
        self.length(&w.0).1
    }

    pub fn scaled(&self, c: f64) -> Weights {
        Weights(self.0.iter().map(|x| x * c).collect())
    }

    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Result of ingesting user weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub weights: Weights,
    pub normalized: bool,
    pub projected: bool,
}

/// Simplex, floors, triangular margins and inverse symmetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub n: usize,
    pub epsilon: f64,
    pub margin: f64,
    /// `π_u ≤ π_s + π_t − margin`
    pub triangles: Vec<(Gen, Gen, Gen)>,
    /// `π_s = π_t`
    pub symmetric: Vec<(Gen, Gen)>,
}

/// Smallest slack of each constraint family (negative means violated).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slacks {
    pub floor: f64,
    pub triangle: f64,
    pub sum: f64,
    pub symmetry: f64,
}

const SUM_TOL: f64 = 1e-9;
const SYM_TOL: f64 = 1e-12;
/// Relative slack allowed on triangles of search weights.
const ADMISSIBLE_TOL: f64 = 1e-9;

impl Constraints {
    pub fn new(aux: &AuxGroup, epsilon: f64, margin: f64) -> Self {
        Constraints {
            n: aux.num_gens(),
            epsilon,
            margin,
            triangles: aux.triangles(),
            symmetric: aux.inverse_pairs(),
        }
    }

    pub fn from_aux(aux: &AuxGroup) -> Self {
        Self::new(aux, DEFAULT_EPSILON, DEFAULT_MARGIN)
    }

    /// Only the simplex and the floors.
    pub fn simplex(n: usize, epsilon: f64) -> Self {
        Constraints { n, epsilon, margin: 0.0, triangles: Vec::new(), symmetric: Vec::new() }
    }

    pub fn slacks(&self, p: &[f64]) -> Slacks {
        let floor = p.iter().map(|&x| x - self.epsilon).fold(f64::INFINITY, f64::min);
        let triangle = self
            .triangles
            .iter()
            .map(|&(s, t, u)| p[s as usize] + p[t as usize] - self.margin - p[u as usize])
            .fold(f64::INFINITY, f64::min);
        let sum = -(p.iter().sum::<f64>() - 1.0).abs();
        let symmetry = self
            .symmetric
            .iter()
            .map(|&(s, t)| -(p[s as usize] - p[t as usize]).abs())
            .fold(0.0, f64::min);
        Slacks { floor, triangle, sum, symmetry }
    }

    pub fn is_feasible(&self, p: &[f64]) -> bool {
        if p.len() != self.n || p.iter().any(|x| !x.is_finite()) {
            return false;
        }
        let s = self.slacks(p);
        s.floor >= 0.0 && s.triangle >= 0.0 && s.sum >= -SUM_TOL && s.symmetry >= -SYM_TOL
    }

    /// A strictly feasible point: the uniform vector.
    pub fn interior(&self) -> Result<Vec<f64>> {
        let u = vec![1.0 / self.n as f64; self.n];
        let s = self.slacks(&u);
        if s.floor > 0.0 && s.triangle > 0.0 {
            Ok(u)
        } else {
            Err(Error::Infeasible(format!(
                "uniform weights violate the constraints (epsilon {}, margin {})",
                self.epsilon, self.margin
            )))
        }
    }

    /// Euclidean projection onto `{Σ = 1, x ≥ ε}`.
    fn project_simplex(&self, v: &mut [f64]) {
        let n = v.len();
        let budget = 1.0 - self.epsilon * n as f64;
        let mut y: Vec<f64> = v.iter().map(|x| x - self.epsilon).collect();
        let mut sorted = y.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cum = 0.0;
        let mut theta = 0.0;
        for (i, &u) in sorted.iter().enumerate() {
            cum += u;
            let t = (cum - budget) / (i + 1) as f64;
            if u - t > 0.0 {
                theta = t;
            }
        }
        for (x, yi) in v.iter_mut().zip(y.iter_mut()) {
            *yi = (*yi - theta).max(0.0);
            *x = *yi + self.epsilon;
        }
    }

    fn project_symmetry(&self, v: &mut [f64]) {
        for &(s, t) in &self.symmetric {
            let m = 0.5 * (v[s as usize] + v[t as usize]);
            v[s as usize] = m;
            v[t as usize] = m;
        }
    }

    /// Projection of `v` onto the halfspace `a·x ≤ b` for one triangle.
    fn project_triangle(&self, v: &mut [f64], tri: (Gen, Gen, Gen)) {
        let (s, t, u) = (tri.0 as usize, tri.1 as usize, tri.2 as usize);
        let mut a = vec![0.0; v.len()];
        a[u] += 1.0;
        a[s] -= 1.0;
        a[t] -= 1.0;
        let viol = a.iter().zip(v.iter()).map(|(ai, vi)| ai * vi).sum::<f64>() + self.margin;
        if viol > 0.0 {
            let norm2: f64 = a.iter().map(|x| x * x).sum();
            for (vi, ai) in v.iter_mut().zip(&a) {
                *vi -= viol * ai / norm2;
            }
        }
    }

    /// Returns `raw` unchanged if feasible; otherwise approximately the
    /// nearest feasible point (Dykstra's alternating projections), nudged
    /// towards the uniform vector until the exact check passes.
    pub fn project(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.n {
            return Err(Error::Weights(format!("expected {} weights, got {}", self.n, raw.len())));
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::Weights("weights must be finite".into()));
        }
        if self.is_feasible(raw) {
            return Ok(raw.to_vec());
        }
        let center = self.interior()?;
        let sets = 2 + self.triangles.len();
        let mut x = raw.to_vec();
        let mut incr = vec![vec![0.0; self.n]; sets];
        for _ in 0..500 {
            let before = x.clone();
            for (k, inc) in incr.iter_mut().enumerate() {
                let mut y: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
                match k {
                    0 => self.project_simplex(&mut y),
                    1 => self.project_symmetry(&mut y),
                    _ => self.project_triangle(&mut y, self.triangles[k - 2]),
                }
                for i in 0..self.n {
                    inc[i] = x[i] + inc[i] - y[i];
                }
                x = y;
            }
            let moved: f64 = x.iter().zip(&before).map(|(a, b)| (a - b).abs()).sum();
            if moved < 1e-15 {
                break;
            }
        }
        self.project_simplex(&mut x);
        self.project_symmetry(&mut x);
        if self.is_feasible(&x) {
            return Ok(x);
        }
        // The feasible part of the segment towards the center is an interval
        // ending at the center; bisect for its start.
        let blend = |lam: f64| -> Vec<f64> {
            x.iter().zip(&center).map(|(a, c)| (1.0 - lam) * a + lam * c).collect()
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.is_feasible(&blend(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let out = blend(hi);
        if self.is_feasible(&out) {
            Ok(out)
        } else {
            Err(Error::Infeasible("projection did not reach the feasible set".into()))
        }
    }

    /// Normalizes user weights (clamping non-positive entries to the floor
    /// first) and projects them if still infeasible.
    pub fn ingest(&self, raw: &[f64]) -> Result<Ingested> {
        if raw.len() != self.n {
            return Err(Error::Weights(format!("expected {} weights, got {}", self.n, raw.len())));
        }
        if raw.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Weights("weights must be finite and non-negative".into()));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::Weights("weights must not all vanish".into()));
        }
        let scaled: Vec<f64> = raw.iter().map(|x| (x / total).max(self.epsilon)).collect();
        let total2: f64 = scaled.iter().sum();
        let normalized_vec: Vec<f64> = scaled.iter().map(|x| x / total2).collect();
        let normalized = (total - 1.0).abs() > SUM_TOL || raw.iter().any(|&x| x / total < self.epsilon);
        if self.is_feasible(&normalized_vec) || self.is_admissible(&normalized_vec) {
            return Ok(Ingested { weights: Weights(normalized_vec), normalized, projected: false });
        }
        let p = self.project(&normalized_vec)?;
        Ok(Ingested { weights: Weights(p), normalized, projected: true })
    }

    /// Whether `p` is usable for a search: positive, and triangular and
    /// symmetric up to rounding. Neither the margin nor the scale matter
    /// here, so published weights that sit on a triangle stay usable.
    pub fn is_admissible(&self, p: &[f64]) -> bool {
        if p.len() != self.n || p.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return false;
        }
        let tol = ADMISSIBLE_TOL * p.iter().sum::<f64>();
        let tri = self.triangles.iter().all(|&(s, t, u)| p[u as usize] <= p[s as usize] + p[t as usize] + tol);
        let sym = self.symmetric.iter().all(|&(s, t)| (p[s as usize] - p[t as usize]).abs() <= tol);
        tri && sym
    }

    pub fn check(&self, w: &Weights) -> Result<()> {
        if self.is_admissible(w.as_slice()) {
            Ok(())
        } else {
            Err(Error::Weights(format!("weights {:?} violate the constraints: {:?}", w.as_slice(), self.slacks(w.as_slice()))))
        }
    }
}

/// Parses `uniform` or a comma-separated list of numbers.
pub fn parse_weight_list(text: &str, n: usize) -> Result<Vec<f64>> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']');
    if t == "uniform" {
        return Ok(vec![1.0; n]);
    }
    t.split(',')
        .map(|x| {
            x.trim().parse::<f64>().map_err(|_| Error::Weights(format!("cannot parse weight `{}`", x.trim())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::zoo;
    use crate::group::Group;

    fn klein() -> Constraints {
        let g = Group::new(zoo::grigorchuk()).unwrap();
        Constraints::from_aux(&AuxGroup::parse_blocks(&g, "{a},{b,c,d}").unwrap())
    }

    #[test]
    fn uniform_is_unchanged() {
        let c = klein();
        assert_eq!(c.project(&[0.25; 4]).unwrap(), vec![0.25; 4]);
        assert_eq!(c.triangles.len(), 6);
    }

    #[test]
    fn floors_are_enforced() {
        let c = klein();
        let p = c.project(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(c.is_feasible(&p));
        assert!(p.iter().all(|&x| x >= 1e-4));
    }

    #[test]
    fn triangle_repair() {
        let c = klein();
        let raw = [0.5, 0.05, 0.05, 0.4];
        assert!(!c.is_feasible(&raw));
        let p = c.project(&raw).unwrap();
        let s = c.slacks(&p);
        assert!(s.triangle >= 0.0 && s.floor >= 0.0);
        // d ≤ b + c − μ is the violated constraint
        assert!(p[3] <= p[1] + p[2] - 1e-6);
    }

    #[test]
    fn ingest_normalizes() {
        let c = klein();
        let i = c.ingest(&[1.0, 0.99, 0.98, 0.97]).unwrap();
        assert!(i.normalized && !i.projected);
        assert!((i.weights.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(c.ingest(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn lengths() {
        let w = Weights::from_vec_unchecked(zoo::BARTHOLDI_WEIGHTS.to_vec());
        let (n, l) = w.length(&[1, 0]);
        assert_eq!(n, 2);
        assert!((l - 0.652531).abs() < 1e-12);
        assert_eq!(w.length(&[]), (0, 0.0));
        assert_eq!(w.length(&[3]).1, 0.123631);
    }
}
