//! The arc embedding of C₂≀Cₙ.
//!
//! For every arc `I` of length ⌊n/3⌋ and every `A ⊆ I` the embedding carries
//! one copy of `π_{−A}` applied to the arc vector `v^I`:
//!
//! ```text
//! v^I_k = η               k ∈ I
//!       = δ·d(k, I)^α     k ∉ I        (α = 1/2 by default)
//! f(g)  = ⊕_I ⊕_{A⊆I} π_{−A}(g) v^I
//! ```
//!
//! Indexing by the reflected set `−A` matches the group law, under which the
//! toggle acts on coordinate `k` through the lamp at `−k`. With it, the
//! collapse `Σ_{A⊆I} W_{−A}(B) = 2^{|I|}·𝟙{I ∩ −B = ∅}` turns the squared
//! distance into a sum over a single rotated profile `w`:
//!
//! ```text
//! ‖f(x,j) − f(e)‖² = n·Σ_t (w_{t+j} − w_t)² + 2n·Σ_t 𝟙{x ∩ [t−L+1, t] ≠ ∅}·w_t·w_{t+j}
//! ```
//!
//! where `w = 2^{L/2}·v^{[0, L−1]}` and `L = ⌊n/3⌋`. The factor `2^{L/2}` is
//! folded into the parameters in log space so no intermediate over- or underflows.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::group::{arc_distance, arc_family, inverse, mul, Arc, GroupElement, LampConfig, MIN_N};
use crate::representations::pi_apply;

/// Largest n for which [`dense_embed`] materializes coordinates.
pub const DENSE_MAX_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbeddingParams {
    pub n: usize,
    pub arc_len: usize,
    pub alpha: f64,
    log2_eta: f64,
    log2_delta: f64,
}

impl EmbeddingParams {
    /// `η = 1/(n·2^{n/6})`, `δ = 1/(√n·2^{n/6})`, arcs of length ⌊n/3⌋, `α = 1/2`.
    pub fn default_for(n: usize) -> Result<Self> {
        if n < MIN_N {
            return Err(usage(format!("embedding needs n ≥ {MIN_N}, got {n}")));
        }
        let lg = (n as f64).log2();
        let sixth = n as f64 / 6.0;
        Ok(EmbeddingParams {
            n,
            arc_len: n / 3,
            alpha: 0.5,
            log2_eta: -lg - sixth,
            log2_delta: -0.5 * lg - sixth,
        })
    }

    pub fn with_eta_delta(n: usize, eta: f64, delta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0 && delta.is_finite() && delta > 0.0) {
            return Err(usage(format!("eta and delta must be finite and positive, got {eta}, {delta}")));
        }
        Ok(EmbeddingParams { log2_eta: eta.log2(), log2_delta: delta.log2(), ..Self::default_for(n)? })
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(usage(format!("alpha must be finite and positive, got {alpha}")));
        }
        Ok(EmbeddingParams { alpha, ..self })
    }

    /// Multiplies both η and δ by `c`.
    pub fn scaled(self, c: f64) -> Self {
        let lc = c.log2();
        EmbeddingParams { log2_eta: self.log2_eta + lc, log2_delta: self.log2_delta + lc, ..self }
    }

    pub fn eta(&self) -> f64 {
        self.log2_eta.exp2()
    }

    pub fn delta(&self) -> f64 {
        self.log2_delta.exp2()
    }

    fn profile_value(&self, dist_to_arc: usize, log2_extra: f64) -> f64 {
        if dist_to_arc == 0 {
            (self.log2_eta + log2_extra).exp2()
        } else {
            (self.log2_delta + log2_extra).exp2() * (dist_to_arc as f64).powf(self.alpha)
        }
    }
}

/// `v^I` over one arc.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcProfile {
    pub arc: Arc,
    pub values: Vec<f64>,
}

pub fn build_arc_profile(arc: &Arc, params: &EmbeddingParams) -> Result<ArcProfile> {
    if arc.length() != params.arc_len || arc.n() != params.n {
        return Err(usage(format!(
            "arc of length {} on n={} does not match params (length {}, n={})",
            arc.length(),
            arc.n(),
            params.arc_len,
            params.n
        )));
    }
    let values = (0..params.n).map(|k| params.profile_value(arc_distance(k, arc), 0.0)).collect();
    Ok(ArcProfile { arc: *arc, values })
}

/// Materialized coordinates of `f(g)`, ordered by arc, then subset, then k.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseEmbedding {
    pub n: usize,
    pub values: Vec<f64>,
}

impl DenseEmbedding {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn sq_dist(&self, other: &DenseEmbedding) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn sq_norm(&self) -> f64 {
        self.values.iter().map(|a| a * a).sum()
    }
}

/// Total coordinate count `n²·2^{⌊n/3⌋}`.
pub fn dense_dimension(params: &EmbeddingParams) -> usize {
    params.n * params.n * (1usize << params.arc_len)
}

/// `f(g)` evaluated representation by representation. Exists as an oracle for
/// the closed form; limited to n ≤ 12.
pub fn dense_embed(g: &GroupElement, params: &EmbeddingParams) -> Result<DenseEmbedding> {
    let n = params.n;
    if g.n() != n {
        return Err(usage(format!("element has n={}, params have n={n}", g.n())));
    }
    if n > DENSE_MAX_N {
        return Err(Error::Size {
            guard: "dense",
            detail: format!("n={n} exceeds {DENSE_MAX_N}; use fast_sq_dist"),
        });
    }
    let mut values = Vec::with_capacity(dense_dimension(params));
    for arc in arc_family(n)? {
        let profile = build_arc_profile(&arc, params)?;
        let v: Vec<Complex64> = profile.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let members: Vec<usize> = arc.members().collect();
        for mask in 0..1u32 << members.len() {
            let a = LampConfig::from_members(
                n,
                members.iter().enumerate().filter(|(t, _)| mask >> t & 1 == 1).map(|(_, &k)| k),
            )?;
            values.extend(pi_apply(&a.negate(), g, &v).into_iter().map(|z| z.re));
        }
    }
    Ok(DenseEmbedding { n, values })
}

/// The two nonnegative pieces of the squared distance and the two-term
/// approximation built from `|v_{k+j} − v_k|²` and `𝟙{W = −1}|v_k|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TermDecomposition {
    /// `2^L·Σ_I Σ_k (v^I_{k+j} − v^I_k)²`.
    pub travel: f64,
    /// `2^{L+1}·Σ_I Σ_k 𝟙{meet}·v^I_k·v^I_{k+j}`; `travel + parity` is exact.
    pub parity: f64,
    pub total: f64,
    /// `travel + 2^{L−1}·Σ_I Σ_k 𝟙{meet}·(v^I_k)²`.
    pub approximation: f64,
}

/// Precomputed closed-form evaluator.
#[derive(Clone, Debug)]
pub struct Embedding {
    params: EmbeddingParams,
    /// `2^{L/2}·v^{[0, L−1]}`.
    w: Vec<f64>,
    /// For n ≤ 64: bitmask of the window `[t−L+1, t]`.
    windows: Vec<u64>,
}

impl Embedding {
    pub fn new(params: EmbeddingParams) -> Result<Self> {
        let n = params.n;
        let base = Arc::new(0, params.arc_len, n)?;
        let half = params.arc_len as f64 / 2.0;
        let w = (0..n).map(|k| params.profile_value(arc_distance(k, &base), half)).collect();
        let l = params.arc_len;
        let windows = if n <= 64 {
            (0..n)
                .map(|t| (0..l).fold(0u64, |m, d| m | 1 << ((t + n - d) % n)))
                .collect()
        } else {
            Vec::new()
        };
        Ok(Embedding { params, w, windows })
    }

    pub fn with_defaults(n: usize) -> Result<Self> {
        Self::new(EmbeddingParams::default_for(n)?)
    }

    pub fn params(&self) -> &EmbeddingParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// The rescaled base profile `w`.
    pub fn base_profile(&self) -> &[f64] {
        &self.w
    }

    /// `meet[t]` is true when the lamps hit the window `[t−L+1, t]`.
    fn meets(&self, lamps: &LampConfig) -> Vec<bool> {
        let n = self.params.n;
        if let Some(bits) = lamps.bits() {
            return self.windows.iter().map(|&m| bits & m != 0).collect();
        }
        let l = self.params.arc_len;
        let lit: Vec<usize> = (0..n).map(|k| usize::from(lamps.contains(k))).collect();
        let mut count: usize = (0..l).map(|d| lit[(n - d) % n]).sum();
        let mut out = Vec::with_capacity(n);
        for t in 0..n {
            if t > 0 {
                count += lit[t];
                count -= lit[(t + n - l) % n];
            }
            out.push(count > 0);
        }
        out
    }

    pub fn term_decomposition(&self, g: &GroupElement) -> TermDecomposition {
        let n = self.params.n;
        let j = g.pos.value();
        let meet = self.meets(&g.lamps);
        let (mut travel, mut parity, mut approx_parity) = (0.0, 0.0, 0.0);
        for t in 0..n {
            let (a, b) = (self.w[t], self.w[(t + j) % n]);
            travel += (b - a) * (b - a);
            if meet[t] {
                parity += a * b;
                approx_parity += a * a;
            }
        }
        let nf = n as f64;
        let (travel, parity) = (nf * travel, 2.0 * nf * parity);
        TermDecomposition {
            travel,
            parity,
            total: travel + parity,
            approximation: travel + 0.5 * nf * approx_parity,
        }
    }

    /// `‖f(g) − f(e)‖²`.
    pub fn sq_dist(&self, g: &GroupElement) -> f64 {
        let n = self.params.n;
        let j = g.pos.value();
        let w = &self.w;
        let mut travel = 0.0;
        let mut parity = 0.0;
        if let Some(bits) = g.lamps.bits() {
            for t in 0..n {
                let (a, b) = (w[t], w[(t + j) % n]);
                travel += (b - a) * (b - a);
                if bits & self.windows[t] != 0 {
                    parity += a * b;
                }
            }
        } else {
            let meet = self.meets(&g.lamps);
            for t in 0..n {
                let (a, b) = (w[t], w[(t + j) % n]);
                travel += (b - a) * (b - a);
                if meet[t] {
                    parity += a * b;
                }
            }
        }
        n as f64 * (travel + 2.0 * parity)
    }

    /// `‖f(g) − f(h)‖² = ‖f(h⁻¹g) − f(e)‖²`.
    pub fn pair_sq_dist(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        self.sq_dist(&mul(&inverse(h), g))
    }

    pub fn pair_dist(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        self.pair_sq_dist(g, h).sqrt()
    }

    /// `E[‖f(x, 0) − f(e)‖² | x ⊆ B]`: a uniform `x ⊆ B` misses a window
    /// holding `m` points of `B` with probability `2^{−m}`.
    pub fn subcube_average(&self, b: &LampConfig) -> f64 {
        let n = self.params.n;
        let l = self.params.arc_len;
        let mut acc = 0.0;
        for t in 0..n {
            let hits = (0..l).filter(|&d| b.contains((t + n - d) % n)).count();
            if hits > 0 {
                acc += self.w[t] * self.w[t] * (1.0 - 0.5f64.powi(hits as i32));
            }
        }
        2.0 * n as f64 * acc
    }
}

/// `‖f(g) − f(e)‖²` with a one-off evaluator.
pub fn fast_sq_dist(g: &GroupElement, params: &EmbeddingParams) -> Result<f64> {
    if g.n() != params.n {
        return Err(usage(format!("element has n={}, params have n={}", g.n(), params.n)));
    }
    Ok(Embedding::new(*params)?.sq_dist(g))
}

pub fn pair_sq_dist(g: &GroupElement, h: &GroupElement, params: &EmbeddingParams) -> Result<f64> {
    crate::group::multiply(g, h)?;
    fast_sq_dist(&mul(&inverse(h), g), params)
}

pub fn term_decomposition(g: &GroupElement, params: &EmbeddingParams) -> Result<TermDecomposition> {
    if g.n() != params.n {
        return Err(usage(format!("element has n={}, params have n={}", g.n(), params.n)));
    }
    Ok(Embedding::new(*params)?.term_decomposition(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Lamplighter;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn collapse_identity_against_subset_enumeration() {
        // Σ_{A⊆I} (−1)^{|A∩B|} = 2^{|I|}·𝟙{I∩B=∅}
        for size in 0..=10usize {
            let n = 12;
            let i = LampConfig::from_members(n, 0..size).unwrap();
            for b_bits in [0u64, 1, 0b110, 1 << 11, 0b1010_1010_1010, 0xfff, 1 << 10] {
                let b = LampConfig::from_bits(n, b_bits);
                let brute: i64 = (0..1u64 << size)
                    .map(|a| if (a & b_bits).count_ones() % 2 == 0 { 1 } else { -1 })
                    .sum();
                let closed = if i.intersects(&b) { 0 } else { 1i64 << size };
                assert_eq!(brute, closed);
            }
        }
    }

    #[test]
    fn profile_examples() {
        let p = EmbeddingParams::default_for(12).unwrap();
        let prof = build_arc_profile(&Arc::new(0, 4, 12).unwrap(), &p).unwrap();
        assert_eq!(prof.values[2], p.eta());
        assert!(rel(prof.values[5], p.delta() * 2f64.sqrt()) < 1e-15);
        assert!(rel(prof.values[7], 2.0 * p.delta()) < 1e-15);
        assert!(rel(prof.values[8], 2.0 * p.delta()) < 1e-15);
        assert!(build_arc_profile(&Arc::new(0, 3, 12).unwrap(), &p).is_err());
    }

    #[test]
    fn profile_covariances() {
        let n = 11;
        let p = EmbeddingParams::default_for(n).unwrap();
        let fam = arc_family(n).unwrap();
        let base = build_arc_profile(&fam[0], &p).unwrap();
        for arc in &fam {
            let prof = build_arc_profile(arc, &p).unwrap();
            let refl = build_arc_profile(&arc.reflect(), &p).unwrap();
            for k in 0..n {
                assert_eq!(prof.values[(k + arc.start()) % n], base.values[k]);
                assert_eq!(refl.values[(n - k) % n], prof.values[k]);
            }
        }
    }

    #[test]
    fn dense_dimension_and_identity_block() {
        let p = EmbeddingParams::default_for(6).unwrap();
        let e = GroupElement::identity(6);
        let f = dense_embed(&e, &p).unwrap();
        assert_eq!(f.dim(), 144);
        // first block is (I_0, ∅): equals v^{I_0}
        let v0 = build_arc_profile(&Arc::new(0, 2, 6).unwrap(), &p).unwrap();
        assert_eq!(&f.values[..6], &v0.values[..]);
        let norms: f64 = arc_family(6)
            .unwrap()
            .iter()
            .map(|a| build_arc_profile(a, &p).unwrap().values.iter().map(|x| x * x).sum::<f64>())
            .sum();
        assert!(rel(f.sq_norm(), 4.0 * norms) < 1e-12);
    }

    #[test]
    fn dense_guard() {
        let p = EmbeddingParams::default_for(13).unwrap();
        let err = dense_embed(&GroupElement::identity(13), &p).unwrap_err();
        assert!(matches!(err, Error::Size { guard: "dense", .. }));
    }

    #[test]
    fn generator_value_at_twelve() {
        let p = EmbeddingParams::default_for(12).unwrap();
        let d = fast_sq_dist(&GroupElement::toggle(12), &p).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-12, "{d}");
        assert_eq!(fast_sq_dist(&GroupElement::identity(12), &p).unwrap(), 0.0);
        let t = term_decomposition(&GroupElement::toggle(12), &p).unwrap();
        assert!((t.parity - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.travel, 0.0);
    }

    #[test]
    fn fast_matches_dense_at_nine() {
        let p = EmbeddingParams::default_for(9).unwrap();
        let e = Embedding::new(p).unwrap();
        let fe = dense_embed(&GroupElement::identity(9), &p).unwrap();
        for g in Lamplighter::new(9).unwrap().elements().step_by(37) {
            let dense = dense_embed(&g, &p).unwrap().sq_dist(&fe);
            let fast = e.sq_dist(&g);
            assert!(rel(fast, dense) < 1e-9 || (dense == 0.0 && fast == 0.0), "{g}: {fast} vs {dense}");
        }
    }

    #[test]
    fn wide_path_matches_word_path() {
        // same element evaluated through the bitmask path (n = 64) and the
        // window-count path agrees
        let n = 64;
        let e = Embedding::with_defaults(n).unwrap();
        let lamps = LampConfig::from_members(n, [0, 7, 31, 50, 63]).unwrap();
        let meets_fast = e.meets(&lamps);
        let l = n / 3;
        for t in 0..n {
            let slow = (0..l).any(|d| lamps.contains((t + n - d) % n));
            assert_eq!(meets_fast[t], slow);
        }
        let e70 = Embedding::with_defaults(70).unwrap();
        let g = GroupElement::from_parts(70, &[1, 69, 35], 9).unwrap();
        let t = e70.term_decomposition(&g);
        assert!(rel(e70.sq_dist(&g), t.total) < 1e-12);
    }

    #[test]
    fn term_decomposition_edge_cases() {
        let p = EmbeddingParams::default_for(10).unwrap();
        let e = Embedding::new(p).unwrap();
        let g = GroupElement::step(10, 3);
        let t = e.term_decomposition(&g);
        assert_eq!(t.parity, 0.0);
        assert!(rel(t.travel, e.sq_dist(&g)) < 1e-12);
        let h = GroupElement::from_parts(10, &[2, 5], 0).unwrap();
        assert_eq!(e.term_decomposition(&h).travel, 0.0);
    }

    #[test]
    fn large_n_stays_finite() {
        let e = Embedding::with_defaults(3000).unwrap();
        let d = e.sq_dist(&GroupElement::toggle(3000));
        assert!((d - 2.0 * 1000.0 / 3000.0).abs() < 1e-9, "{d}");
        assert!(e.sq_dist(&GroupElement::step(3000, 1)).is_finite());
    }

    #[test]
    fn subcube_examples() {
        let e = Embedding::with_defaults(9).unwrap();
        assert_eq!(e.subcube_average(&LampConfig::empty(9)), 0.0);
        let half = 0.5 * e.sq_dist(&GroupElement::toggle(9));
        assert!(rel(e.subcube_average(&LampConfig::singleton(9, 0)), half) < 1e-12);
    }
}
