use std::path::Path;

use lamplighter::abelian_lp::{
    fourier_weights, gl_check, lp_table, negative_type_test, AbelianGroupSpec, InvariantMetric,
};
use lamplighter::analysis::{distortion_scan, sampled_scan, symmetrize as symmetrize_map, DistortionReport, FiniteGroup, ScanMode};
use lamplighter::embedding::{Embedding, EmbeddingParams};
use lamplighter::group::{displacement, inverse, multiply, GroupElement, LampConfig, Lamplighter};
use lamplighter::lower_bounds::{
    admissible_count, full_inventory, lemma32_bound, lemma32_from_mean_square, prop34_bound, reduced_inventory,
    sample_generators, RhoSource,
};
use lamplighter::word_metric::{
    bfs_table, sigma_band, sigma_from_identity, standard_mean_square, GeneratorSet, TravelPlanner, WordMetricTable,
    DEFAULT_BFS_CAP,
};
use lamplighter::{Error, Exec};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{write_csv, CliError};
use crate::{AbelianArgs, EmbedArgs, LowerBoundArgs, RhoMode, ScanKind, SymmetrizeArgs, WordMetricArgs, ZigzagArgs};

/// Largest n for an all-pairs embedding scan.
pub const EXACT_SCAN_MAX_N: usize = 12;

pub struct Ctx<'a> {
    pub seed: u64,
    pub exec: Exec,
    pub csv: Option<&'a Path>,
}

type Out = Result<Value, CliError>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn size(guard: &'static str, detail: String) -> CliError {
    CliError::Lib(Error::Size { guard, detail })
}

/// Replaces witness indices by readable elements.
fn witnesses<T: std::fmt::Display>(r: &DistortionReport<(usize, usize)>, domain: &[T]) -> Value {
    let pair = |p: Option<(usize, usize)>| p.map(|(a, b)| [domain[a].to_string(), domain[b].to_string()]);
    json!({ "expansion": pair(r.expansion.pair), "contraction": pair(r.contraction.pair) })
}

pub fn word_metric_check(a: &WordMetricArgs, ctx: &Ctx) -> Out {
    let n = a.n;
    let gens = GeneratorSet::standard(n)?;
    let table = bfs_table(n, &gens)?;
    let planner = TravelPlanner::new(n)?;
    let elems: Vec<GroupElement> = Lamplighter::new(n)?.elements().collect();
    let planned = lamplighter::par::map_collect(ctx.exec, 0..elems.len(), |i| planner.element_length(&elems[i]));
    let mismatches: Vec<usize> = (0..elems.len()).filter(|&i| planned[i] != table.at_index(i)).collect();
    if let Some(&i) = mismatches.first() {
        return Err(CliError::Lib(Error::Consistency(format!(
            "{} of {} elements disagree; first {}: bfs {} planner {}",
            mismatches.len(),
            elems.len(),
            elems[i],
            table.at_index(i),
            planned[i]
        ))));
    }
    if let Some(path) = ctx.csv {
        write_csv(
            path,
            &["element", "bfs", "planner", "sigma"],
            elems.iter().enumerate().map(|(i, g)| {
                [g.to_string(), table.at_index(i).to_string(), planned[i].to_string(), sigma_from_identity(g).to_string()]
            }),
        )?;
    }
    let band = sigma_band(&table);
    Ok(json!({
        "n": n,
        "order": elems.len(),
        "agree": true,
        "diameter": table.diameter(),
        "mean_square": table.mean_square(),
        "mean_square_closed": standard_mean_square(n)?,
        "sigma_band": band,
    }))
}

fn embedding_params(a: &EmbedArgs) -> Result<EmbeddingParams, CliError> {
    let mut p = match (a.eta, a.delta) {
        (None, None) => EmbeddingParams::default_for(a.n)?,
        (eta, delta) => {
            let d = EmbeddingParams::default_for(a.n)?;
            EmbeddingParams::with_eta_delta(a.n, eta.unwrap_or(d.eta()), delta.unwrap_or(d.delta()))?
        }
    };
    if let Some(alpha) = a.alpha {
        p = p.with_alpha(alpha)?;
    }
    Ok(p)
}

pub fn embed_distortion(a: &EmbedArgs, ctx: &Ctx) -> Out {
    let n = a.n;
    let params = embedding_params(a)?;
    let emb = Embedding::new(params)?;
    let (report, witness, csv_rows) = match a.mode {
        ScanKind::Exact | ScanKind::Reduced => {
            let limit = if a.mode == ScanKind::Exact { EXACT_SCAN_MAX_N } else { DEFAULT_BFS_CAP };
            if n > limit {
                return Err(size("scan", format!("{:?} scan needs n ≤ {limit}, got {n}; use --mode sampled", a.mode)));
            }
            let table = bfs_table(n, &GeneratorSet::standard(n)?)?;
            let elems: Vec<GroupElement> = Lamplighter::new(n)?.elements().collect();
            let mode = if a.mode == ScanKind::Exact { ScanMode::Exact } else { ScanMode::Reduced { base: 0 } };
            let metric = |x: &GroupElement, y: &GroupElement| table.get(&displacement(x, y).expect("same n")) as f64;
            let r = distortion_scan(&elems, metric, |x, y| emb.pair_dist(x, y), mode, ctx.exec)?;
            let w = witnesses(&r, &elems);
            let rows: Option<Vec<[String; 3]>> = ctx.csv.map(|_| {
                elems.iter().map(|g| [g.to_string(), table.get(g).to_string(), emb.sq_dist(g).sqrt().to_string()]).collect()
            });
            (r, w, rows)
        }
        ScanKind::Sampled => {
            let planner = TravelPlanner::new(n)?;
            let g = Lamplighter::new(n)?;
            let r = sampled_scan(
                a.samples,
                ctx.seed,
                ctx.exec,
                |rng| (g.random_element(rng), g.random_element(rng)),
                |(x, y)| planner.pair_distance(x, y) as f64,
                |(x, y)| emb.pair_dist(x, y),
            )?;
            let pair = |p: &Option<(GroupElement, GroupElement)>| p.as_ref().map(|(x, y)| [x.to_string(), y.to_string()]);
            let w = json!({ "expansion": pair(&r.expansion.pair), "contraction": pair(&r.contraction.pair) });
            let strip = DistortionReport {
                expansion: lamplighter::analysis::Extreme { ratio: r.expansion.ratio, pair: None::<(usize, usize)> },
                contraction: lamplighter::analysis::Extreme { ratio: r.contraction.ratio, pair: None },
                distortion: r.distortion,
                pairs: r.pairs,
                mode: r.mode,
            };
            (strip, w, None)
        }
    };
    if let (Some(path), Some(rows)) = (ctx.csv, csv_rows) {
        write_csv(path, &["element", "word_length", "embedded_distance"], rows)?;
    }
    let mut body = to_value(&report);
    body["witnesses"] = witness;
    Ok(json!({
        "n": n,
        "params": {
            "arc_len": params.arc_len,
            "alpha": params.alpha,
            "eta": params.eta(),
            "delta": params.delta(),
        },
        "distortion": body,
        "ratio_to_sqrt_log_n": report.distortion / (n as f64).ln().sqrt(),
        "noncontractive_scale": report.noncontractive_scale(),
    }))
}

#[derive(Deserialize)]
struct SymInput {
    n: usize,
    values: Vec<SymValue>,
}

#[derive(Deserialize)]
struct SymValue {
    lamps: Vec<usize>,
    pos: usize,
    vector: Vec<f64>,
}

struct LampGroup(usize);

impl FiniteGroup for LampGroup {
    fn order(&self) -> usize {
        self.0 << self.0
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        let (a, b) = (GroupElement::from_dense_index(self.0, a), GroupElement::from_dense_index(self.0, b));
        multiply(&a, &b).expect("same n").dense_index()
    }
    fn inv(&self, a: usize) -> usize {
        inverse(&GroupElement::from_dense_index(self.0, a)).dense_index()
    }
}

fn read_sym_input(path: &Path) -> Result<(usize, Vec<Vec<f64>>), CliError> {
    let input = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    let raw: SymInput = serde_json::from_str(&text).map_err(|e| input(e.to_string()))?;
    let n = raw.n;
    let order = Lamplighter::new(n)?.order().ok_or_else(|| input(format!("group order for n={n} too large")))?;
    if order > lamplighter::analysis::SYMMETRIZE_MAX_ORDER {
        return Err(size(
            "symmetrize",
            format!("|G| = {order} exceeds {}", lamplighter::analysis::SYMMETRIZE_MAX_ORDER),
        ));
    }
    let mut values: Vec<Option<Vec<f64>>> = vec![None; order];
    let dim = raw.values.first().map_or(0, |v| v.vector.len());
    for v in raw.values {
        let g = GroupElement::new(LampConfig::from_members(n, v.lamps)?, v.pos)?;
        if v.vector.len() != dim {
            return Err(input(format!("vector for {g} has length {}, expected {dim}", v.vector.len())));
        }
        let slot = &mut values[g.dense_index()];
        if slot.is_some() {
            return Err(input(format!("duplicate entry for {g}")));
        }
        *slot = Some(v.vector);
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(input(format!("{missing} of {order} group elements have no vector")));
    }
    Ok((n, values.into_iter().map(Option::unwrap).collect()))
}

pub fn symmetrize(a: &SymmetrizeArgs, ctx: &Ctx) -> Out {
    let (n, values) = read_sym_input(&a.input)?;
    let group = LampGroup(n);
    let table = bfs_table(n, &GeneratorSet::standard(n)?)?;
    let order = group.order();
    let domain: Vec<usize> = (0..order).collect();
    let elems: Vec<GroupElement> = domain.iter().map(|&i| GroupElement::from_dense_index(n, i)).collect();
    let rho = |&x: &usize, &y: &usize| table.get(&displacement(&elems[x], &elems[y]).expect("same n")) as f64;
    let euclid = |x: usize, y: usize| values[x].iter().zip(&values[y]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();

    let before = distortion_scan(&domain, rho, |&x, &y| euclid(x, y), ScanMode::Exact, ctx.exec);
    let s = symmetrize_map(&group, &values, ctx.exec)?;
    let after = distortion_scan(&domain, rho, |&x, &y| s.sq_dist(x, y).max(0.0).sqrt(), ScanMode::Exact, ctx.exec);

    let scan = |r: &lamplighter::Result<DistortionReport<(usize, usize)>>| match r {
        Ok(r) => {
            let mut v = to_value(r);
            v["witnesses"] = witnesses(r, &elems);
            v
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    if let Some(path) = ctx.csv {
        write_csv(
            path,
            &["element", "word_length", "before", "after"],
            (0..order).map(|i| [elems[i].to_string(), table.at_index(i).to_string(), euclid(i, 0).to_string(), s.sq_dist(i, 0).max(0.0).sqrt().to_string()]),
        )?;
    }
    Ok(json!({
        "n": n,
        "order": order,
        "input_dimension": values.first().map_or(0, Vec::len),
        "output_dimension": s.coordinates.first().map_or(0, Vec::len),
        "min_eigenvalue": s.min_eigenvalue,
        "clipped": s.clipped,
        "degenerate": s.degenerate,
        "before": scan(&before),
        "after": scan(&after),
    }))
}

pub fn lower_bound(a: &LowerBoundArgs, ctx: &Ctx) -> Out {
    let n = a.n;
    let gens = GeneratorSet::new(n, a.gens.iter().copied(), true)?;
    let irreps = if a.full { full_inventory(&gens)? } else { reduced_inventory(&gens)? };
    let (report, source) = if gens.is_standard() && n > DEFAULT_BFS_CAP {
        (lemma32_from_mean_square(standard_mean_square(n)?, &gens, &irreps, ctx.exec)?, "closed-form")
    } else {
        let table: WordMetricTable = bfs_table(n, &gens)?;
        (lemma32_bound(&table, &gens, &irreps, ctx.exec)?, "bfs")
    };
    if let Some(path) = ctx.csv {
        write_csv(
            path,
            &["n", "generators", "mean_square", "min_rayleigh", "argmin", "bound"],
            [[
                n.to_string(),
                report.generators.to_string(),
                report.mean_square.to_string(),
                report.min_rayleigh.to_string(),
                report.argmin.clone(),
                report.bound.to_string(),
            ]],
        )?;
    }
    Ok(json!({
        "movement": gens.movement(),
        "inventory": if a.full { "full" } else { "reduced" },
        "mean_square_source": source,
        "bound": to_value(&report),
    }))
}

pub fn zigzag(a: &ZigzagArgs, ctx: &Ctx) -> Out {
    let n = a.n;
    if a.seeds == 0 {
        return Err(CliError::Lib(Error::Usage("--seeds must be at least 1".into())));
    }
    let mut rows = Vec::new();
    for k in 0..a.seeds {
        let seed = ctx.seed.wrapping_add(k);
        let steps = sample_generators(n, a.count, seed)?;
        let rep = match a.mode {
            RhoMode::Estimate => prop34_bound(n, &steps, RhoSource::LampEstimate)?,
            RhoMode::Exact => {
                let table = bfs_table(n, &GeneratorSet::new(n, steps.iter().copied(), true)?)?;
                prop34_bound(n, &steps, RhoSource::Exact(&table))?
            }
        };
        rows.push(json!({ "seed": seed, "steps": steps, "report": to_value(&rep) }));
    }
    if let Some(path) = ctx.csv {
        write_csv(
            path,
            &["seed", "lambda2", "lambda", "avg_rho_sq", "d_lower"],
            rows.iter().map(|r| {
                let rep = &r["report"];
                [&r["seed"], &rep["lambda2"], &rep["lambda"], &rep["avg_rho_sq"], &rep["d_lower"]].map(|v| v.to_string())
            }),
        )?;
    }
    Ok(json!({
        "n": n,
        "count": a.count,
        "log_base": a.log_base,
        "admissible": admissible_count(n, a.count, a.log_base),
        "runs": rows,
    }))
}

fn read_metric_file(spec: &AbelianGroupSpec, path: &Path) -> Result<InvariantMetric, CliError> {
    let input = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input(e.to_string()))?;
    let d = spec.moduli().len();
    let mut values: Vec<Option<f64>> = vec![None; spec.order()];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| input(e.to_string()))?;
        if rec.len() != d + 1 {
            return Err(input(format!("row {} has {} fields, expected {}", line + 1, rec.len(), d + 1)));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| input(format!("row {}: {s:?}: {e}", line + 1)));
        let coords = rec
            .iter()
            .take(d)
            .map(|s| s.parse::<usize>().map_err(|e| input(format!("row {}: {s:?}: {e}", line + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let idx = spec.index(&coords)?;
        if values[idx].replace(parse(&rec[d])?).is_some() {
            return Err(input(format!("duplicate row for {coords:?}")));
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(input(format!("{missing} of {} group elements have no value", spec.order())));
    }
    Ok(InvariantMetric::new(spec, values.into_iter().map(Option::unwrap).collect())?)
}

pub fn abelian_lp(a: &AbelianArgs, ctx: &Ctx) -> Out {
    let spec = match (&a.moduli, a.cycle) {
        (Some(m), _) => AbelianGroupSpec::new(m.clone())?,
        (None, Some(m)) => AbelianGroupSpec::cyclic(m)?,
        (None, None) => return Err(CliError::Cli("one of --moduli or --cycle is required".into())),
    };
    let metric = match a.metric.as_str() {
        "hamming" => InvariantMetric::hamming(&spec),
        "cycle" => InvariantMetric::cycle(&spec),
        other => match other.strip_prefix("file:") {
            Some(p) => read_metric_file(&spec, Path::new(p))?,
            None => {
                return Err(CliError::Lib(Error::Usage(format!(
                    "unknown metric {other:?}; expected hamming, cycle or file:<path>"
                ))))
            }
        },
    };
    let w = fourier_weights(&spec, &metric)?;
    let nt = negative_type_test(&w);
    let gl = if nt.passed { Some(gl_check(&spec, &metric, a.p, ctx.exec)?) } else { None };
    if let (Some(path), true) = (ctx.csv, nt.passed) {
        let dist = lp_table(&w, a.p, ctx.exec)?;
        write_csv(
            path,
            &["element", "rho", "lp_distance", "weight"],
            (0..spec.order()).map(|x| {
                [format!("{:?}", spec.coords(x)), metric.values[x].to_string(), dist[x].to_string(), w.a[x].to_string()]
            }),
        )?;
    }
    Ok(json!({
        "moduli": spec.moduli(),
        "order": spec.order(),
        "metric": a.metric,
        "p": a.p,
        "weights": w.a,
        "reconstruction_residual": w.residual,
        "negative_type": to_value(&nt),
        "gl": gl.as_ref().map(to_value),
    }))
}
