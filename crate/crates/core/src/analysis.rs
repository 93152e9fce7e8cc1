//! Distortion measurement, Gram-averaging symmetrization and the subcube
//! diagnostic.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::{Embedding, EmbeddingParams};
use crate::error::{usage, Error, Result};
use crate::group::LampConfig;
use crate::par::{fold_reduce, map_collect, Exec};

/// Samples per independently seeded stream. Fixed so sampled reports do not
/// depend on the number of workers.
pub const SAMPLE_CHUNK: usize = 4096;

/// Largest group for which [`symmetrize`] builds a dense kernel.
pub const SYMMETRIZE_MAX_ORDER: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScanMode {
    /// All unordered pairs of the domain.
    Exact,
    /// All pairs `(g, base)`; sound when the metric is invariant and the
    /// embedding equivariant.
    Reduced { base: usize },
    /// `count` seeded uniform pairs of distinct points.
    Sampled { count: usize, seed: u64 },
}

/// One extreme ratio and the pair realizing it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extreme<W> {
    pub ratio: f64,
    pub pair: Option<W>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionReport<W> {
    /// max ‖f(a) − f(b)‖ / ρ(a, b)
    pub expansion: Extreme<W>,
    /// max ρ(a, b) / ‖f(a) − f(b)‖
    pub contraction: Extreme<W>,
    pub distortion: f64,
    pub pairs: u64,
    pub mode: ScanMode,
}

impl<W> DistortionReport<W> {
    /// Scale factor that makes the embedding non-contractive.
    pub fn noncontractive_scale(&self) -> f64 {
        self.contraction.ratio
    }
}

/// Partial reduction state. Candidates carry an ordinal; on equal ratios the
/// smaller ordinal wins, so any merge order gives the same result.
#[derive(Clone, Debug)]
struct Acc<W> {
    exp: (f64, u64, Option<W>),
    con: (f64, u64, Option<W>),
    pairs: u64,
    degenerate: Option<(u64, W)>,
}

impl<W: Clone> Acc<W> {
    fn new() -> Self {
        Acc { exp: (0.0, u64::MAX, None), con: (0.0, u64::MAX, None), pairs: 0, degenerate: None }
    }

    fn better(a: &(f64, u64, Option<W>), b: &(f64, u64, Option<W>)) -> bool {
        b.0 > a.0 || (b.0 == a.0 && b.1 < a.1)
    }

    fn push(mut self, ord: u64, rho: f64, emb: f64, w: impl FnOnce() -> W) -> Self {
        if rho == 0.0 && emb == 0.0 {
            return self;
        }
        self.pairs += 1;
        if emb == 0.0 || rho == 0.0 {
            if self.degenerate.as_ref().is_none_or(|(o, _)| ord < *o) {
                self.degenerate = Some((ord, w()));
            }
            return self;
        }
        let e = emb / rho;
        let c = rho / emb;
        let take_e = e > self.exp.0 || (e == self.exp.0 && ord < self.exp.1);
        let take_c = c > self.con.0 || (c == self.con.0 && ord < self.con.1);
        if take_e || take_c {
            let w = w();
            if take_c {
                self.con = (c, ord, Some(w.clone()));
            }
            if take_e {
                self.exp = (e, ord, Some(w));
            }
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        if Self::better(&self.exp, &other.exp) {
            self.exp = other.exp;
        }
        if Self::better(&self.con, &other.con) {
            self.con = other.con;
        }
        self.pairs += other.pairs;
        self.degenerate = match (self.degenerate, other.degenerate) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }

    fn finish(self, mode: ScanMode) -> Result<DistortionReport<W>>
    where
        W: std::fmt::Debug,
    {
        if let Some((_, w)) = self.degenerate {
            return Err(Error::Degenerate(format!("zero distance on exactly one side at pair {w:?}")));
        }
        if self.pairs == 0 {
            return Err(usage("no pairs of distinct points to scan"));
        }
        Ok(DistortionReport {
            distortion: self.exp.0 * self.con.0,
            expansion: Extreme { ratio: self.exp.0, pair: self.exp.2 },
            contraction: Extreme { ratio: self.con.0, pair: self.con.2 },
            pairs: self.pairs,
            mode,
        })
    }
}

/// Measures the distortion of `embed` against `metric` over `domain`.
///
/// Both oracles return distances (not squares). Witness pairs are domain
/// indices. A pair with zero embedded distance and positive metric distance
/// (or the reverse) is a degeneracy error.
pub fn distortion_scan<T, M, E>(
    domain: &[T],
    metric: M,
    embed: E,
    mode: ScanMode,
    exec: Exec,
) -> Result<DistortionReport<(usize, usize)>>
where
    T: Sync,
    M: Fn(&T, &T) -> f64 + Sync + Send,
    E: Fn(&T, &T) -> f64 + Sync + Send,
{
    let len = domain.len();
    let acc = match mode {
        ScanMode::Exact => fold_reduce(
            exec,
            0..len,
            Acc::new,
            |mut acc, i| {
                for j in i + 1..len {
                    let (a, b) = (&domain[i], &domain[j]);
                    acc = acc.push((i * len + j) as u64, metric(a, b), embed(a, b), || (i, j));
                }
                acc
            },
            Acc::merge,
        ),
        ScanMode::Reduced { base } => {
            if base >= len {
                return Err(usage(format!("base index {base} outside domain of size {len}")));
            }
            let e = &domain[base];
            fold_reduce(
                exec,
                0..len,
                Acc::new,
                |acc, i| {
                    if i == base {
                        return acc;
                    }
                    acc.push(i as u64, metric(&domain[i], e), embed(&domain[i], e), || (i, base))
                },
                Acc::merge,
            )
        }
        ScanMode::Sampled { count, seed } => {
            if len < 2 {
                return Err(usage("sampling needs at least two points"));
            }
            sampled_acc(count, seed, exec, |rng| {
                let i = rng.gen_range(0..len);
                let mut j = rng.gen_range(0..len - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            }, |&(i, j)| (metric(&domain[i], &domain[j]), embed(&domain[i], &domain[j])))
        }
    };
    acc.finish(mode)
}

/// Sampled scan over a domain too large to list: `draw` produces a pair from
/// the seeded stream and witnesses are the drawn pairs themselves.
pub fn sampled_scan<W, D, M, E>(
    count: usize,
    seed: u64,
    exec: Exec,
    draw: D,
    metric: M,
    embed: E,
) -> Result<DistortionReport<W>>
where
    W: Clone + Send + std::fmt::Debug,
    D: Fn(&mut ChaCha8Rng) -> W + Sync + Send,
    M: Fn(&W) -> f64 + Sync + Send,
    E: Fn(&W) -> f64 + Sync + Send,
{
    sampled_acc(count, seed, exec, draw, |w| (metric(w), embed(w))).finish(ScanMode::Sampled { count, seed })
}

fn sampled_acc<W, D, F>(count: usize, seed: u64, exec: Exec, draw: D, eval: F) -> Acc<W>
where
    W: Clone + Send,
    D: Fn(&mut ChaCha8Rng) -> W + Sync + Send,
    F: Fn(&W) -> (f64, f64) + Sync + Send,
{
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    fold_reduce(
        exec,
        0..chunks,
        Acc::new,
        |mut acc, c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let start = c * SAMPLE_CHUNK;
            for s in start..count.min(start + SAMPLE_CHUNK) {
                let w = draw(&mut rng);
                let (rho, emb) = eval(&w);
                acc = acc.push(s as u64, rho, emb, || w);
            }
            acc
        },
        Acc::merge,
    )
}

/// Gram kernel of an averaged embedding.
#[derive(Clone, Debug)]
pub struct GramKernel {
    pub n_points: usize,
    pub k: DMatrix<f64>,
}

impl GramKernel {
    pub fn trace(&self) -> f64 {
        self.k.trace()
    }

    /// `K(x, x) + K(y, y) − 2K(x, y)`.
    pub fn sq_dist(&self, x: usize, y: usize) -> f64 {
        self.k[(x, x)] + self.k[(y, y)] - 2.0 * self.k[(x, y)]
    }
}

#[derive(Clone, Debug)]
pub struct Symmetrized {
    pub kernel: GramKernel,
    /// Row `x` is the new coordinate vector of element `x`.
    pub coordinates: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    /// Eigenvalues set to zero by the PSD repair.
    pub clipped: usize,
    /// The input map was constant, so the kernel carries no distances.
    pub degenerate: bool,
}

impl Symmetrized {
    pub fn sq_dist(&self, x: usize, y: usize) -> f64 {
        self.coordinates[x].iter().zip(&self.coordinates[y]).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// A finite group given by index arithmetic on `0..order`.
pub trait FiniteGroup: Sync {
    fn order(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;
}

/// Averages `values` over left translations: `K(x, y) = (1/|G|)·Σ_z ⟨f(zx), f(zy)⟩`,
/// evaluated as `κ(x⁻¹y)` with `κ(h) = (1/|G|)·Σ_z ⟨f(z), f(zh)⟩`, then
/// factored by a symmetric eigendecomposition.
pub fn symmetrize<G: FiniteGroup>(group: &G, values: &[Vec<f64>], exec: Exec) -> Result<Symmetrized> {
    let order = group.order();
    if order > SYMMETRIZE_MAX_ORDER {
        return Err(Error::Size {
            guard: "symmetrize",
            detail: format!("|G| = {order} exceeds {SYMMETRIZE_MAX_ORDER}"),
        });
    }
    if values.len() != order {
        return Err(usage(format!("{} vectors for a group of order {order}", values.len())));
    }
    let dim = values.first().map_or(0, Vec::len);
    if values.iter().any(|v| v.len() != dim) {
        return Err(usage("coordinate vectors differ in length"));
    }
    if values.iter().flatten().any(|x| !x.is_finite()) {
        return Err(usage("coordinate vectors must be finite"));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let kappa = map_collect(exec, 0..order, |h| {
        (0..order).map(|z| dot(&values[z], &values[group.mul(z, h)])).sum::<f64>() / order as f64
    });
    let inv: Vec<usize> = (0..order).map(|x| group.inv(x)).collect();
    let k = DMatrix::from_fn(order, order, |x, y| kappa[group.mul(inv[x], y)]);
    let kernel = GramKernel { n_points: order, k };
    let trace = kernel.trace();

    let first = &values[0];
    let degenerate = values.iter().all(|v| v == first);

    let eig = SymmetricEigen::new(kernel.k.clone());
    let min_eigenvalue = eig.eigenvalues.min();
    let floor = -1e-9 * trace.abs();
    if min_eigenvalue < floor {
        return Err(Error::Consistency(format!(
            "averaged kernel has eigenvalue {min_eigenvalue:e} below −1e−9·trace"
        )));
    }
    let keep: Vec<usize> = (0..order).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    let clipped = order - keep.len();
    let coordinates = (0..order)
        .map(|x| keep.iter().map(|&i| eig.eigenvectors[(x, i)] * eig.eigenvalues[i].sqrt()).collect())
        .collect();
    Ok(Symmetrized { kernel, coordinates, min_eigenvalue, clipped, degenerate })
}

/// `E[‖f(x, 0) − f(e)‖² | x ⊆ B]` for the arc embedding.
pub fn subcube_diagnostic(b: &LampConfig, params: &EmbeddingParams) -> Result<f64> {
    if b.n() != params.n {
        return Err(usage(format!("B has n={}, params have n={}", b.n(), params.n)));
    }
    Ok(Embedding::new(*params)?.subcube_average(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{inverse, multiply, GroupElement, Lamplighter};

    struct Lamp(usize);

    impl FiniteGroup for Lamp {
        fn order(&self) -> usize {
            self.0 << self.0
        }
        fn mul(&self, a: usize, b: usize) -> usize {
            let (a, b) = (GroupElement::from_dense_index(self.0, a), GroupElement::from_dense_index(self.0, b));
            multiply(&a, &b).unwrap().dense_index()
        }
        fn inv(&self, a: usize) -> usize {
            inverse(&GroupElement::from_dense_index(self.0, a)).dense_index()
        }
    }

    fn line(k: usize) -> Vec<f64> {
        (0..k).map(|i| (i * i) as f64).collect()
    }

    #[test]
    fn isometry_and_scaling() {
        let pts = line(20);
        let d = |a: &f64, b: &f64| (a - b).abs();
        for exec in [Exec::Parallel, Exec::Sequential] {
            let r = distortion_scan(&pts, d, d, ScanMode::Exact, exec).unwrap();
            assert_eq!(r.distortion, 1.0);
            assert_eq!(r.pairs, 190);
            let r = distortion_scan(&pts, d, |a: &f64, b: &f64| 3.5 * (a - b).abs(), ScanMode::Exact, exec).unwrap();
            assert!((r.distortion - 1.0).abs() < 1e-12);
            assert!((r.expansion.ratio - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn witnesses_and_degeneracy() {
        let pts = line(6);
        let d = |a: &f64, b: &f64| (a - b).abs();
        let sq = |a: &f64, b: &f64| (a - b).abs().sqrt();
        let r = distortion_scan(&pts, d, sq, ScanMode::Exact, Exec::Sequential).unwrap();
        assert_eq!(r.expansion.pair, Some((0, 1)));
        assert_eq!(r.contraction.pair, Some((0, 5)));
        assert!((r.distortion - 5.0).abs() < 1e-12);
        let flat = |a: &f64, b: &f64| if *a == 0.0 || *b == 0.0 { 1.0 } else { 0.0 };
        let err = distortion_scan(&pts, d, flat, ScanMode::Exact, Exec::Parallel).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn sampled_is_reproducible_and_sound() {
        let pts = line(50);
        let d = |a: &f64, b: &f64| (a - b).abs();
        let e = |a: &f64, b: &f64| (a - b).abs().powf(0.8);
        let exact = distortion_scan(&pts, d, e, ScanMode::Exact, Exec::Parallel).unwrap();
        let mode = ScanMode::Sampled { count: 10_000, seed: 3 };
        let a = distortion_scan(&pts, d, e, mode, Exec::Parallel).unwrap();
        let b = distortion_scan(&pts, d, e, mode, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.distortion <= exact.distortion);
        assert_eq!(a.pairs, 10_000);
    }

    #[test]
    fn reduced_matches_exact_at_six() {
        let n = 6;
        let g = Lamplighter::new(n).unwrap();
        let elems: Vec<_> = g.elements().collect();
        let table = crate::word_metric::bfs_table(n, &crate::word_metric::GeneratorSet::standard(n).unwrap()).unwrap();
        let emb = Embedding::with_defaults(n).unwrap();
        let rho = |a: &GroupElement, b: &GroupElement| table.get(&crate::group::displacement(a, b).unwrap()) as f64;
        let f = |a: &GroupElement, b: &GroupElement| emb.pair_dist(a, b);
        let exact = distortion_scan(&elems, rho, f, ScanMode::Exact, Exec::Parallel).unwrap();
        let reduced = distortion_scan(&elems, rho, f, ScanMode::Reduced { base: 0 }, Exec::Parallel).unwrap();
        assert!((exact.expansion.ratio - reduced.expansion.ratio).abs() < 1e-12 * exact.expansion.ratio);
        assert!((exact.contraction.ratio - reduced.contraction.ratio).abs() < 1e-12 * exact.contraction.ratio);
    }

    #[test]
    fn symmetrize_equivariant_input_keeps_distances() {
        let n = 3;
        let emb = crate::embedding::EmbeddingParams::default_for(n).unwrap();
        let vals: Vec<Vec<f64>> = (0..n << n)
            .map(|i| crate::embedding::dense_embed(&GroupElement::from_dense_index(n, i), &emb).unwrap().values)
            .collect();
        let s = symmetrize(&Lamp(n), &vals, Exec::Sequential).unwrap();
        assert!(!s.degenerate);
        for x in 0..24 {
            for y in 0..24 {
                let d0: f64 = vals[x].iter().zip(&vals[y]).map(|(a, b)| (a - b) * (a - b)).sum();
                assert!((s.sq_dist(x, y) - d0).abs() < 1e-9 * s.kernel.trace());
            }
        }
    }

    #[test]
    fn symmetrize_constant_and_guards() {
        let s = symmetrize(&Lamp(3), &vec![vec![1.0, 2.0]; 24], Exec::Parallel).unwrap();
        assert!(s.degenerate);
        assert!(symmetrize(&Lamp(3), &vec![vec![1.0]; 23], Exec::Parallel).is_err());
        let err = symmetrize(&Lamp(10), &[], Exec::Parallel).unwrap_err();
        assert!(matches!(err, Error::Size { guard: "symmetrize", .. }));
    }

    #[test]
    fn subcube_matches_enumeration() {
        let n = 9;
        let p = EmbeddingParams::default_for(n).unwrap();
        let emb = Embedding::new(p).unwrap();
        let b = LampConfig::from_members(n, [0, 3, 7]).unwrap();
        let members: Vec<usize> = b.members().collect();
        let brute: f64 = (0..8u32)
            .map(|m| {
                let x = LampConfig::from_members(n, (0..3).filter(|t| m >> t & 1 == 1).map(|t| members[t])).unwrap();
                emb.sq_dist(&GroupElement::new(x, 0).unwrap())
            })
            .sum::<f64>()
            / 8.0;
        let diag = subcube_diagnostic(&b, &p).unwrap();
        assert!((diag - brute).abs() < 1e-12 * brute);
    }
}
