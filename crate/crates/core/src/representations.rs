//! Unitary representations of C₂≀Cₙ: the characters `χ_u` that factor through
//! the lighter position, and the Walsh-twisted permutation representations `π_A`.
//!
//! `π_A(x, j)` acts on ℂⁿ by `(π_A(x, j)v)_k = W_A(α^k(x))·v_{k+j}`, the result of
//! factoring `(x, j) = (x, 0)·(∅, 1)^j`. `A = ∅` gives the regular representation
//! of Cₙ pulled back through the quotient; `A = Cₙ` is replaced by the
//! one-dimensional sign representation `(−1)^{|x|}`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::group::{GroupElement, LampConfig};
use crate::word_metric::GeneratorSet;

/// `W_A(x) = (−1)^{|A∩x|}`.
#[inline]
pub fn walsh_eval(a: &LampConfig, x: &LampConfig) -> f64 {
    if a.intersection_len(x).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `χ_u(x, j) = e^{2πiuj/n}`.
pub fn chi_apply(u: usize, g: &GroupElement) -> Complex64 {
    let n = g.n();
    let phase = TAU * ((u * g.pos.value()) % n) as f64 / n as f64;
    Complex64::from_polar(1.0, phase)
}

/// `π_A(g)v` for `v ∈ ℂⁿ`.
///
/// # Panics
/// If `v.len() != n`; for `A = Cₙ` use [`RepLabel::apply`] with a 1-vector.
pub fn pi_apply(a: &LampConfig, g: &GroupElement, v: &[Complex64]) -> Vec<Complex64> {
    let n = g.n();
    assert_eq!(v.len(), n, "π_A acts on ℂⁿ");
    let j = g.pos.value();
    (0..n)
        .map(|k| walsh_eval(a, &g.lamps.shift(k as i64)) * v[(k + j) % n])
        .collect()
}

/// One entry of the representation list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RepLabel {
    Character { u: usize, n: usize },
    Walsh(LampConfig),
}

impl RepLabel {
    pub fn n(&self) -> usize {
        match self {
            RepLabel::Character { n, .. } => *n,
            RepLabel::Walsh(a) => a.n(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RepLabel::Character { .. } => 1,
            RepLabel::Walsh(a) if a.len() == a.n() => 1,
            RepLabel::Walsh(a) => a.n(),
        }
    }

    /// Only `χ_0` is trivial. `π_∅` contains the trivial representation but is
    /// not itself trivial; [`RepLabel::contains_trivial`] covers that case.
    pub fn is_trivial(&self) -> bool {
        matches!(self, RepLabel::Character { u: 0, .. })
    }

    pub fn contains_trivial(&self) -> bool {
        self.is_trivial() || matches!(self, RepLabel::Walsh(a) if a.is_empty())
    }

    pub fn apply(&self, g: &GroupElement, v: &[Complex64]) -> Vec<Complex64> {
        match self {
            RepLabel::Character { u, .. } => {
                assert_eq!(v.len(), 1);
                vec![chi_apply(*u, g) * v[0]]
            }
            RepLabel::Walsh(_) if self.dim() == 1 => {
                assert_eq!(v.len(), 1);
                let sign = if g.lamps.len().is_multiple_of(2) { 1.0 } else { -1.0 };
                vec![v[0] * sign]
            }
            RepLabel::Walsh(a) => pi_apply(a, g, v),
        }
    }

    /// The matrix of `g`, built column by column from basis vectors.
    pub fn matrix(&self, g: &GroupElement) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        for c in 0..d {
            e[c] = Complex64::new(1.0, 0.0);
            for (r, z) in self.apply(g, &e).into_iter().enumerate() {
                m[(r, c)] = z;
            }
            e[c] = Complex64::new(0.0, 0.0);
        }
        m
    }
}

impl std::fmt::Display for RepLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RepLabel::Character { u, .. } => write!(f, "chi_{u}"),
            RepLabel::Walsh(a) => write!(f, "pi_{a}"),
        }
    }
}

impl Serialize for RepLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Matrices of the listed generators (toggle first, then movement steps).
pub fn irrep_generator_matrices(label: &RepLabel, gens: &GeneratorSet) -> Vec<DMatrix<Complex64>> {
    gens.listed().iter().map(|s| label.matrix(s)).collect()
}

/// Every label in the list other than `χ_0` and `π_∅`: characters `u ≠ 0` and
/// Walsh labels for nonempty `A` (n ≤ 20).
pub fn nontrivial_labels(n: usize) -> Vec<RepLabel> {
    assert!(n <= 20, "full label enumeration limited to n ≤ 20");
    let chars = (1..n).map(|u| RepLabel::Character { u, n });
    let walsh = (1..1u64 << n).map(|bits| RepLabel::Walsh(LampConfig::from_bits(n, bits)));
    chars.chain(walsh).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn walsh_examples() {
        let n = 6;
        let x = LampConfig::from_members(n, [1, 3]).unwrap();
        assert_eq!(walsh_eval(&LampConfig::empty(n), &x), 1.0);
        assert_eq!(walsh_eval(&x, &LampConfig::empty(n)), 1.0);
        let a = LampConfig::from_members(n, [0, 1]).unwrap();
        assert_eq!(walsh_eval(&a, &LampConfig::singleton(n, 1)), -1.0);
    }

    #[test]
    fn character_examples() {
        let g = GroupElement::from_parts(4, &[1, 2], 3).unwrap();
        assert_eq!(chi_apply(0, &g), c(1.0));
        let h = GroupElement::from_parts(4, &[1, 2], 0).unwrap();
        assert!((chi_apply(3, &h) - c(1.0)).norm() < 1e-15);
        let m = GroupElement::step(4, 1);
        assert!((chi_apply(1, &m) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn pi_examples() {
        let n = 5;
        let a = LampConfig::from_members(n, [1, 4]).unwrap();
        let v: Vec<_> = (0..n).map(|k| Complex64::new(k as f64, 1.0)).collect();
        assert_eq!(pi_apply(&a, &GroupElement::identity(n), &v), v);
        // (π(∅,1) e_0)_k = (e_0)_{k+1}, so e_0 lands on e_{n−1}
        let mut e0 = vec![c(0.0); n];
        e0[0] = c(1.0);
        let out = pi_apply(&a, &GroupElement::step(n, 1), &e0);
        assert_eq!(out[n - 1], c(1.0));
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);

        let a = LampConfig::singleton(4, 0);
        let v: Vec<_> = (1..=4).map(|k| c(k as f64)).collect();
        let out = pi_apply(&a, &GroupElement::toggle(4), &v);
        assert_eq!(out, vec![c(-1.0), c(2.0), c(3.0), c(4.0)]);
    }

    #[test]
    fn generator_matrices() {
        let gens = GeneratorSet::standard(4).unwrap();
        let triv = irrep_generator_matrices(&RepLabel::Character { u: 0, n: 4 }, &gens);
        assert!(triv.iter().all(|m| m.shape() == (1, 1) && m[(0, 0)] == c(1.0)));

        let w = irrep_generator_matrices(&RepLabel::Walsh(LampConfig::singleton(4, 0)), &gens);
        let diag: Vec<f64> = (0..4).map(|k| w[0][(k, k)].re).collect();
        assert_eq!(diag, vec![-1.0, 1.0, 1.0, 1.0]);
        for k in 0..4 {
            assert_eq!(w[1][(k, (k + 1) % 4)], c(1.0));
        }
        // toggle diagonal is −1 exactly where −k ∈ A
        let a = LampConfig::from_members(7, [1, 2]).unwrap();
        let t = RepLabel::Walsh(a.clone()).matrix(&GroupElement::toggle(7));
        for k in 0..7 {
            let expect = if a.contains((7 - k) % 7) { -1.0 } else { 1.0 };
            assert_eq!(t[(k, k)].re, expect);
        }
    }

    #[test]
    fn sign_representation_is_one_dimensional() {
        let full = RepLabel::Walsh(LampConfig::full(5));
        assert_eq!(full.dim(), 1);
        let g = GroupElement::from_parts(5, &[0, 2, 3], 1).unwrap();
        assert_eq!(full.apply(&g, &[c(2.0)]), vec![c(-2.0)]);
    }
}
