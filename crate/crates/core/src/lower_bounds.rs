//! Lower bounds on Euclidean distortion.
//!
//! Two routes: averaging the word metric against the smallest generator
//! Rayleigh quotient over the nontrivial representations, and the
//! Poincaré-inequality bound driven by the zig-zag eigenvalue estimate for
//! random movement sets.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::group::{inverse, mul, GroupElement, LampConfig};
use crate::par::{map_collect, Exec};
use crate::representations::{irrep_generator_matrices, nontrivial_labels, RepLabel};
use crate::word_metric::{standard_mean_square, GeneratorSet, WordMetricTable};

/// Largest dimension solved with a dense eigensolver.
pub const DENSE_EIGEN_MAX_DIM: usize = 64;

/// Largest n for the exhaustive label list.
pub const FULL_INVENTORY_MAX_N: usize = 16;

/// Largest n for the direct Cayley-graph spectral computations.
pub const CAYLEY_MAX_N: usize = 16;

/// Largest n for power iteration on the whole Cayley graph.
pub const CAYLEY_POWER_MAX_N: usize = 12;

/// A representation together with its generator matrices.
#[derive(Clone, Debug)]
pub struct IrrepSpec {
    pub label: RepLabel,
    pub dim: usize,
    pub matrices: Vec<DMatrix<Complex64>>,
}

impl IrrepSpec {
    pub fn new(label: RepLabel, gens: &GeneratorSet) -> Result<Self> {
        if label.n() != gens.n() {
            return Err(usage(format!("label on n={} with generators on n={}", label.n(), gens.n())));
        }
        let matrices = irrep_generator_matrices(&label, gens);
        Ok(IrrepSpec { dim: label.dim(), label, matrices })
    }
}

/// `Σ_s (2·Id − γ(s) − γ(s)*)`.
fn generator_operator(irrep: &IrrepSpec) -> DMatrix<Complex64> {
    let d = irrep.dim;
    let two = DMatrix::<Complex64>::identity(d, d) * Complex64::new(2.0, 0.0);
    irrep
        .matrices
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, m| acc + &two - m - m.adjoint())
}

/// `min_{v≠0} Σ_s ‖γ(s)v − v‖² / ‖v‖²`.
pub fn rayleigh_min(irrep: &IrrepSpec) -> Result<f64> {
    if irrep.label.contains_trivial() {
        return Err(usage(format!("{} contains the trivial representation", irrep.label)));
    }
    let op = generator_operator(irrep);
    let value = if irrep.dim <= DENSE_EIGEN_MAX_DIM {
        SymmetricEigen::new(op).eigenvalues.min()
    } else {
        smallest_by_power(&op, 4.0 * irrep.matrices.len() as f64)
    };
    Ok(value.max(0.0))
}

/// Smallest eigenvalue of a Hermitian `op` with spectrum in `[0, shift]`,
/// from the top of `shift·I − op`.
fn smallest_by_power(op: &DMatrix<Complex64>, shift: f64) -> f64 {
    let d = op.nrows();
    let m = DMatrix::<Complex64>::identity(d, d) * Complex64::new(shift, 0.0) - op;
    let mut v = nalgebra::DVector::from_fn(d, |i, _| Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let mut top = 0.0;
    for _ in 0..50_000 {
        let w = &m * &v;
        let est = v.dotc(&w).re;
        let norm = w.norm();
        if norm == 0.0 {
            return shift;
        }
        let next = w / Complex64::new(norm, 0.0);
        let done = (est - top).abs() <= 1e-14 * shift;
        top = est;
        v = next;
        if done {
            break;
        }
    }
    shift - top
}

/// Characters `u ≠ 0` and every nonempty Walsh label (n ≤ 16).
pub fn full_inventory(gens: &GeneratorSet) -> Result<Vec<IrrepSpec>> {
    let n = gens.n();
    if n > FULL_INVENTORY_MAX_N {
        return Err(Error::Size {
            guard: "inventory",
            detail: format!("n={n} exceeds {FULL_INVENTORY_MAX_N}; use reduced_inventory"),
        });
    }
    nontrivial_labels(n).into_iter().map(|l| IrrepSpec::new(l, gens)).collect()
}

/// Characters `u ≠ 0`, the singleton Walsh label `{0}` and the sign.
///
/// The toggle contributes `diag(4·𝟙{−k ∈ A})` to the generator operator, so
/// the smallest eigenvalue is nondecreasing in `A`, and rotating `A` is a
/// unitary conjugation. Among nonempty Walsh labels the minimum is therefore
/// attained at a singleton.
pub fn reduced_inventory(gens: &GeneratorSet) -> Result<Vec<IrrepSpec>> {
    let n = gens.n();
    let mut labels: Vec<RepLabel> = (1..n).map(|u| RepLabel::Character { u, n }).collect();
    labels.push(RepLabel::Walsh(LampConfig::singleton(n, 0)));
    labels.push(RepLabel::Walsh(LampConfig::full(n)));
    labels.into_iter().map(|l| IrrepSpec::new(l, gens)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma32Report {
    pub n: usize,
    pub generators: usize,
    pub mean_square: f64,
    pub min_rayleigh: f64,
    pub argmin: String,
    pub labels_checked: usize,
    pub bound: f64,
}

/// `√(mean ρ(x, e)²/2 · min_γ rayleigh_min(γ)/|S|)` from a precomputed
/// mean square.
pub fn lemma32_from_mean_square(
    mean_square: f64,
    gens: &GeneratorSet,
    irreps: &[IrrepSpec],
    exec: Exec,
) -> Result<Lemma32Report> {
    if irreps.is_empty() {
        return Err(usage("empty representation list"));
    }
    if irreps.iter().any(|r| r.label.n() != gens.n()) {
        return Err(usage("representations and generators disagree on n"));
    }
    let values = map_collect(exec, 0..irreps.len(), |i| rayleigh_min(&irreps[i]));
    let mut best = (f64::INFINITY, 0);
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v < best.0 {
            best = (v, i);
        }
    }
    let s = gens.len() as f64;
    Ok(Lemma32Report {
        n: gens.n(),
        generators: gens.len(),
        mean_square,
        min_rayleigh: best.0,
        argmin: irreps[best.1].label.to_string(),
        labels_checked: irreps.len(),
        bound: (mean_square / 2.0 * best.0 / s).sqrt(),
    })
}

pub fn lemma32_bound(
    table: &WordMetricTable,
    gens: &GeneratorSet,
    irreps: &[IrrepSpec],
    exec: Exec,
) -> Result<Lemma32Report> {
    if table.gens() != gens {
        return Err(usage("table was built for a different generating set"));
    }
    lemma32_from_mean_square(table.mean_square(), gens, irreps, exec)
}

/// The bound for the standard generators at any n ≤ 100, using the exact
/// second moment and the reduced label list.
pub fn lemma32_standard(n: usize, exec: Exec) -> Result<Lemma32Report> {
    let gens = GeneratorSet::standard(n)?;
    lemma32_from_mean_square(standard_mean_square(n)?, &gens, &reduced_inventory(&gens)?, exec)
}

/// `S ∪ (−S)` as residues, sorted.
fn symmetrize_steps(n: usize, steps: &[usize]) -> Result<Vec<usize>> {
    if steps.is_empty() {
        return Err(usage("movement set is empty"));
    }
    let mut out = Vec::with_capacity(2 * steps.len());
    for &s in steps {
        let s = s % n;
        if s == 0 {
            return Err(usage("movement set contains 0"));
        }
        out.push(s);
        out.push(n - s);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Normalized eigenvalues of Cayley(Cₙ, S ∪ −S), sorted descending.
pub fn circulant_spectrum(n: usize, steps: &[usize]) -> Result<Vec<f64>> {
    let sym = symmetrize_steps(n, steps)?;
    let k = sym.len() as f64;
    let mut out: Vec<f64> = (0..n)
        .map(|u| sym.iter().map(|&s| (TAU * ((u * s) % n) as f64 / n as f64).cos()).sum::<f64>() / k)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// A uniformly random `count`-subset of `Cₙ \ {0}` conditioned on generating
/// `Cₙ`, by rejection.
pub fn sample_generators(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 || count == 0 || count > n - 1 {
        return Err(usage(format!("cannot draw {count} nonzero residues mod {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut s: Vec<usize> = index::sample(&mut rng, n - 1, count).into_iter().map(|i| i + 1).collect();
        if s.iter().fold(n, |g, &x| gcd(g, x)) == 1 {
            s.sort_unstable();
            return Ok(s);
        }
    }
    Err(usage(format!("no generating {count}-subset of C_{n} found by rejection")))
}

/// `|S| ≥ 100·log n` in the given base.
pub fn admissible_count(n: usize, count: usize, log_base: f64) -> bool {
    count as f64 >= 100.0 * (n as f64).ln() / log_base.ln()
}

/// `½(1−λ₂²)λ₁ + ½√((1−λ₂²)²λ₁² + 4λ₂²)`.
pub fn zigzag_lambda(lambda1: f64, lambda2: f64) -> f64 {
    let a = (1.0 - lambda2 * lambda2) * lambda1;
    0.5 * a + 0.5 * (a * a + 4.0 * lambda2 * lambda2).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub enum RhoSource<'a> {
    /// Mean of ρ² from a word-metric table with the matching generators.
    Exact(&'a WordMetricTable),
    /// `E|x △ y|²` for independent uniform lamp configurations.
    LampEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub movement: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda: f64,
    pub avg_rho_sq: f64,
    pub d_lower: f64,
    pub degenerate: bool,
    pub rho_source: &'static str,
    /// Exact second eigenvalue of the lamplighter Cayley graph itself (exact
    /// mode, n ≤ 16).
    pub cayley_lambda2: Option<f64>,
    /// The bound with `cayley_lambda2` in place of the zig-zag value.
    pub d_lower_cayley: Option<f64>,
}

/// `E|x △ y|² = n/2 + n(n−1)/4`.
pub fn lamp_difference_second_moment(n: usize) -> f64 {
    let n = n as f64;
    n / 2.0 + n * (n - 1.0) / 4.0
}

/// `D ≥ √((1−λ)·avg ρ²/2)` with `λ` the zig-zag estimate.
pub fn prop34_bound(n: usize, steps: &[usize], source: RhoSource<'_>) -> Result<SpectralReport> {
    if n < 3 {
        return Err(usage(format!("n must be at least 3, got {n}")));
    }
    let spec = circulant_spectrum(n, steps)?;
    let lambda1 = 1.0 - 2.0 / n as f64;
    let lambda2 = spec[1];
    let lambda = zigzag_lambda(lambda1, lambda2.max(0.0));
    let mut cayley = None;
    let (avg_rho_sq, rho_source) = match source {
        RhoSource::Exact(table) => {
            let gens = GeneratorSet::new(n, steps.iter().copied(), true)?;
            if table.gens() != &gens {
                return Err(usage("table was built for a different generating set"));
            }
            if n <= CAYLEY_MAX_N {
                cayley = Some(cayley_lambda2(&gens, Exec::Parallel)?);
            }
            (table.mean_square(), "exact")
        }
        RhoSource::LampEstimate => (lamp_difference_second_moment(n), "lamp-estimate"),
    };
    let bound = |lam: f64| if lam >= 1.0 - 1e-12 { 0.0 } else { ((1.0 - lam) * avg_rho_sq / 2.0).sqrt() };
    let degenerate = lambda >= 1.0 - 1e-12;
    let d_lower = bound(lambda);
    Ok(SpectralReport {
        n,
        movement: steps.len(),
        lambda1,
        lambda2,
        lambda,
        avg_rho_sq,
        d_lower,
        degenerate,
        rho_source,
        cayley_lambda2: cayley,
        d_lower_cayley: cayley.map(bound),
    })
}

/// Symmetrized generator list `{(∅, ±s)} ∪ {({0}, 0)}`.
fn cayley_generators(gens: &GeneratorSet) -> Vec<GroupElement> {
    let n = gens.n();
    let mut out: Vec<GroupElement> = gens.symmetric_steps().into_iter().map(|s| GroupElement::step(n, s as i64)).collect();
    if gens.has_toggle() {
        out.push(GroupElement::toggle(n));
    }
    out
}

/// Second largest normalized adjacency eigenvalue of the Cayley graph of
/// C₂≀Cₙ, block by block over `π_A` (all nonempty `A`, each n-dimensional)
/// and the nontrivial characters.
pub fn cayley_lambda2(gens: &GeneratorSet, exec: Exec) -> Result<f64> {
    let n = gens.n();
    if n > CAYLEY_MAX_N {
        return Err(Error::Size { guard: "cayley", detail: format!("n={n} exceeds {CAYLEY_MAX_N}") });
    }
    let t = cayley_generators(gens);
    let deg = t.len() as f64;
    let char_max = (1..n)
        .map(|u| t.iter().map(|g| (TAU * ((u * g.pos.value()) % n) as f64 / n as f64).cos()).sum::<f64>() / deg)
        .fold(f64::NEG_INFINITY, f64::max);
    let blocks = map_collect(exec, 1..1usize << n, |bits| {
        let a = LampConfig::from_bits(n, bits as u64);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for g in &t {
            for k in 0..n {
                let sign = crate::representations::walsh_eval(&a, &g.lamps.shift(k as i64));
                m[(k, (k + g.pos.value()) % n)] += sign / deg;
            }
        }
        SymmetricEigen::new(m).eigenvalues.max()
    });
    Ok(blocks.into_iter().fold(char_max, f64::max))
}

/// The same eigenvalue by power iteration on the whole graph (n ≤ 12).
pub fn cayley_lambda2_power(gens: &GeneratorSet) -> Result<f64> {
    let n = gens.n();
    if n > CAYLEY_POWER_MAX_N {
        return Err(Error::Size { guard: "cayley", detail: format!("n={n} exceeds {CAYLEY_POWER_MAX_N}") });
    }
    let t = cayley_generators(gens);
    let deg = t.len() as f64;
    let size = n << n;
    let nbrs: Vec<Vec<usize>> = (0..size)
        .map(|i| {
            let g = GroupElement::from_dense_index(n, i);
            t.iter().map(|s| mul(&g, s).dense_index()).collect()
        })
        .collect();
    debug_assert!(t.iter().all(|s| t.contains(&inverse(s))));
    // (I + A)/2 has spectrum in [0, 1]; its top on 𝟙^⊥ is (1 + λ₂)/2.
    let mut v: Vec<f64> = (0..size).map(|i| (i as f64 * 0.754_877_666).fract() - 0.5).collect();
    let project = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / size as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    };
    project(&mut v);
    let mut est = 0.0;
    for _ in 0..200_000 {
        let w: Vec<f64> = (0..size)
            .map(|i| 0.5 * v[i] + 0.5 * nbrs[i].iter().map(|&j| v[j]).sum::<f64>() / deg)
            .collect();
        let next: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        v = w;
        project(&mut v);
        let done = (next - est).abs() < 1e-15;
        est = next;
        if done {
            break;
        }
    }
    Ok(2.0 * est - 1.0)
}
