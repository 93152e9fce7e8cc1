//! Invariant metrics on finite Abelian groups `C_{m₁} × … × C_{m_d}`.
//!
//! An invariant metric `ρ(x, y) = F(x − y)` of negative type has the
//! expansion `F(x) = Σ_χ a_χ·|1 − χ(x)|²` with `a_χ ≥ 0`, and the map
//! `x ↦ (χ(x))_χ` into `L_p(Γ, a)` is the character embedding measured here.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{distortion_scan, DistortionReport, ScanMode};
use crate::error::{usage, Error, Result};
use crate::par::{map_collect, Exec};

/// Largest group order accepted.
pub const MAX_ORDER: usize = 1 << 16;

/// Above this order the triangle inequality is sampled instead of checked
/// exhaustively.
pub const TRIANGLE_EXHAUSTIVE_MAX: usize = 4096;

/// Constant in `measured ≤ C·bound` for [`gl_check`].
pub const GL_CONSTANT: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianGroupSpec {
    moduli: Vec<usize>,
    #[serde(skip)]
    strides: Vec<usize>,
    order: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

impl AbelianGroupSpec {
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(usage("at least one modulus is required"));
        }
        if let Some(&m) = moduli.iter().find(|&&m| m < 2) {
            return Err(usage(format!("modulus {m} is below 2")));
        }
        let mut order: usize = 1;
        let mut strides = Vec::with_capacity(moduli.len());
        for &m in &moduli {
            strides.push(order);
            order = order.checked_mul(m).filter(|&o| o <= MAX_ORDER).ok_or_else(|| Error::Size {
                guard: "abelian",
                detail: format!("|G| = {} exceeds {MAX_ORDER}", moduli.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("·")),
            })?;
        }
        Ok(AbelianGroupSpec { moduli, strides, order })
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn hypercube(d: usize) -> Result<Self> {
        Self::new(vec![2; d])
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `m = lcm(m₁, …, m_d)`, the least `m` with `m·x = 0` for every `x`.
    pub fn exponent(&self) -> usize {
        self.moduli.iter().fold(1, |l, &m| l / gcd(l, m) * m)
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        self.moduli.iter().zip(&self.strides).map(|(&m, &s)| index / s % m).collect()
    }

    pub fn index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.moduli.len() {
            return Err(usage(format!("element has {} coordinates, group has {}", coords.len(), self.moduli.len())));
        }
        coords.iter().zip(&self.moduli).zip(&self.strides).try_fold(0, |acc, ((&c, &m), &s)| {
            if c >= m {
                Err(usage(format!("coordinate {c} out of range for modulus {m}")))
            } else {
                Ok(acc + c * s)
            }
        })
    }

    fn combine(&self, a: usize, b: usize, sign: i64) -> usize {
        let mut out = 0;
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let (x, y) = ((a / s % m) as i64, (b / s % m) as i64);
            out += (x + sign * y).rem_euclid(m as i64) as usize * s;
        }
        out
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, 1)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, -1)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.combine(0, a, -1)
    }

    /// Phase of `χ_u(x) = e^{2πi·Σ_k u_k x_k / m_k}` as a fraction of a turn.
    pub fn phase(&self, u: usize, x: usize) -> f64 {
        self.moduli
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| ((u / s % m) * (x / s % m) % m) as f64 / m as f64)
            .sum::<f64>()
            .fract()
    }

    pub fn character(&self, u: usize, x: usize) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.phase(u, x))
    }

    /// In-place DFT along every axis; `sign = −1` is the forward transform.
    fn dft(&self, data: &mut [Complex64], sign: f64) {
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let roots: Vec<Complex64> = (0..m).map(|k| Complex64::from_polar(1.0, sign * TAU * k as f64 / m as f64)).collect();
            let mut line = vec![Complex64::new(0.0, 0.0); m];
            for base in 0..self.order {
                if base / s % m != 0 {
                    continue;
                }
                for (u, slot) in line.iter_mut().enumerate() {
                    *slot = (0..m).map(|x| data[base + x * s] * roots[u * x % m]).sum();
                }
                for (u, z) in line.iter().enumerate() {
                    data[base + u * s] = *z;
                }
            }
        }
    }
}

/// `F(x) = ρ(x, 0)` indexed like the group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantMetric {
    pub values: Vec<f64>,
}

impl InvariantMetric {
    /// Checks `F(0) = 0`, symmetry, positivity and the triangle inequality.
    pub fn new(spec: &AbelianGroupSpec, values: Vec<f64>) -> Result<Self> {
        let metric = InvariantMetric { values };
        metric.validate(spec)?;
        Ok(metric)
    }

    /// Number of nonzero coordinates.
    pub fn hamming(spec: &AbelianGroupSpec) -> Self {
        let values = (0..spec.order()).map(|x| spec.coords(x).iter().filter(|&&c| c != 0).count() as f64).collect();
        InvariantMetric { values }
    }

    /// Sum over axes of the cyclic distance to 0; the cycle metric on `C_m`.
    pub fn cycle(spec: &AbelianGroupSpec) -> Self {
        let values = (0..spec.order())
            .map(|x| spec.coords(x).iter().zip(spec.moduli()).map(|(&c, &m)| c.min(m - c)).sum::<usize>() as f64)
            .collect();
        InvariantMetric { values }
    }

    pub fn validate(&self, spec: &AbelianGroupSpec) -> Result<()> {
        let f = &self.values;
        let g = spec.order();
        if f.len() != g {
            return Err(usage(format!("metric table has {} entries, group has {g}", f.len())));
        }
        if let Some(x) = (0..g).find(|&x| !f[x].is_finite()) {
            return Err(usage(format!("F{:?} is not finite", spec.coords(x))));
        }
        if f[0] != 0.0 {
            return Err(usage(format!("F(0) = {} must be 0", f[0])));
        }
        if let Some(x) = (1..g).find(|&x| f[x] <= 0.0) {
            return Err(usage(format!("F{:?} = {} must be positive", spec.coords(x), f[x])));
        }
        if let Some(x) = (0..g).find(|&x| f[x] != f[spec.neg(x)]) {
            return Err(usage(format!("F{:?} ≠ F(−x)", spec.coords(x))));
        }
        let tol = 1e-12 * f.iter().fold(0.0f64, |a, &b| a.max(b));
        let violates = |x: usize, y: usize| f[spec.add(x, y)] > f[x] + f[y] + tol;
        let bad = if g <= TRIANGLE_EXHAUSTIVE_MAX {
            (0..g).flat_map(|x| (0..g).map(move |y| (x, y))).find(|&(x, y)| violates(x, y))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            (0..1_000_000)
                .map(|_| (rng.gen_range(0..g), rng.gen_range(0..g)))
                .find(|&(x, y)| violates(x, y))
        };
        if let Some((x, y)) = bad {
            return Err(usage(format!("triangle inequality fails at x={:?}, y={:?}", spec.coords(x), spec.coords(y))));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterWeights {
    pub spec: AbelianGroupSpec,
    /// `a_χ` indexed like the group; the trivial character carries 0.
    pub a: Vec<f64>,
    pub negative_type: bool,
    /// Largest reconstruction error relative to `max F`.
    pub residual: f64,
}

/// `a_χ = −F̂(χ)/(2|G|)` with `F̂(χ) = Σ_x F(x)·conj(χ(x))`.
pub fn fourier_weights(spec: &AbelianGroupSpec, metric: &InvariantMetric) -> Result<CharacterWeights> {
    let g = spec.order();
    if metric.values.len() != g {
        return Err(usage(format!("metric table has {} entries, group has {g}", metric.values.len())));
    }
    let mut data: Vec<Complex64> = metric.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spec.dft(&mut data, -1.0);
    let scale = metric.values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let mut a = vec![0.0; g];
    for u in 1..g {
        if data[u].im.abs() > 1e-9 * scale * g as f64 {
            return Err(Error::Consistency(format!("F̂ is not real at χ{:?}", spec.coords(u))));
        }
        a[u] = -data[u].re / (2.0 * g as f64);
    }
    // Σ_χ a_χ|1 − χ(x)|² = 2Σa − 2·Re Σ_χ a_χ χ(x)
    let total: f64 = a.iter().sum();
    let mut back: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spec.dft(&mut back, 1.0);
    let residual = (0..g)
        .map(|x| (2.0 * total - 2.0 * back[x].re - metric.values[x]).abs())
        .fold(0.0, f64::max)
        / scale;
    if residual > 1e-9 {
        return Err(Error::Consistency(format!("reconstruction residual {residual:e} exceeds 1e−9")));
    }
    let negative_type = a.iter().all(|&v| v >= -1e-12);
    Ok(CharacterWeights { spec: spec.clone(), a, negative_type, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegativeTypeResult {
    pub passed: bool,
    /// Most negative weight when the test fails.
    pub witness: Option<(Vec<usize>, f64)>,
}

pub fn negative_type_test(w: &CharacterWeights) -> NegativeTypeResult {
    let (u, min) = w.a.iter().enumerate().skip(1).fold((0, f64::INFINITY), |b, (u, &v)| if v < b.1 { (u, v) } else { b });
    if min >= -1e-12 {
        NegativeTypeResult { passed: true, witness: None }
    } else {
        NegativeTypeResult { passed: false, witness: Some((w.spec.coords(u), min)) }
    }
}

fn check_lp(w: &CharacterWeights, p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(usage(format!("p = {p} must lie in [1, 2]")));
    }
    if !w.negative_type {
        return Err(usage("weights are not all nonnegative; run negative_type_test first"));
    }
    Ok(())
}

/// `|1 − χ(z)|^p`, from the phase.
fn chord_pow(phase: f64, p: f64) -> f64 {
    (2.0 * (std::f64::consts::PI * phase).sin().abs()).powf(p)
}

/// `(Σ_χ a_χ·|χ(x) − χ(y)|^p)^{1/p}`.
pub fn lp_distance(w: &CharacterWeights, x: usize, y: usize, p: f64) -> Result<f64> {
    check_lp(w, p)?;
    let spec = &w.spec;
    if x >= spec.order() || y >= spec.order() {
        return Err(usage("element index out of range"));
    }
    let z = spec.sub(x, y);
    let s: f64 = (1..spec.order()).map(|u| w.a[u].max(0.0) * chord_pow(spec.phase(u, z), p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `lp_distance(z, 0)` for every `z`.
pub fn lp_table(w: &CharacterWeights, p: f64, exec: Exec) -> Result<Vec<f64>> {
    check_lp(w, p)?;
    let spec = &w.spec;
    Ok(map_collect(exec, 0..spec.order(), |z| {
        (1..spec.order())
            .map(|u| w.a[u].max(0.0) * chord_pow(spec.phase(u, z), p))
            .sum::<f64>()
            .powf(1.0 / p)
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlReport {
    pub moduli: Vec<usize>,
    pub order: usize,
    pub exponent: usize,
    pub p: f64,
    /// Distortion of the character map from `(G, ρ)` into `L₁`.
    pub c1: DistortionReport<(usize, usize)>,
    /// `log m·D⁴` with `D = 1`.
    pub c1_bound: f64,
    /// Distortion from `(G, ρ^{1/p})` into `L_p`.
    pub cp: DistortionReport<(usize, usize)>,
    /// `D^{4/p}/(p − 1)`; infinite at `p = 1`.
    pub cp_bound: Option<f64>,
    pub constant: f64,
    pub pass: bool,
}

/// Measures both distortions with a reduced scan against the identity.
pub fn gl_check(spec: &AbelianGroupSpec, metric: &InvariantMetric, p: f64, exec: Exec) -> Result<GlReport> {
    metric.validate(spec)?;
    let w = fourier_weights(spec, metric)?;
    let nt = negative_type_test(&w);
    if let Some((chi, a)) = nt.witness {
        return Err(usage(format!("metric is not of negative type: a at χ{chi:?} is {a:e}")));
    }
    if spec.order() < 2 {
        return Err(usage("group is trivial"));
    }
    let domain: Vec<usize> = (0..spec.order()).collect();
    let scan = |q: f64| -> Result<DistortionReport<(usize, usize)>> {
        let table = lp_table(&w, q, exec)?;
        distortion_scan(
            &domain,
            |&x, &y| metric.values[spec.sub(x, y)].powf(1.0 / q),
            |&x, &y| table[spec.sub(x, y)],
            ScanMode::Reduced { base: 0 },
            exec,
        )
    };
    let c1 = scan(1.0)?;
    let cp = scan(p)?;
    let m = spec.exponent() as f64;
    let c1_bound = m.ln();
    let cp_bound = (p > 1.0).then(|| 1.0 / (p - 1.0));
    let pass = c1.distortion <= GL_CONSTANT * c1_bound
        && cp_bound.is_none_or(|b| cp.distortion <= GL_CONSTANT * b);
    Ok(GlReport {
        moduli: spec.moduli().to_vec(),
        order: spec.order(),
        exponent: spec.exponent(),
        p,
        c1,
        c1_bound,
        cp,
        cp_bound,
        constant: GL_CONSTANT,
        pass,
    })
}
