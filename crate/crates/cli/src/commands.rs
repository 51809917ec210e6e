use std::collections::BTreeMap;
use std::f64::consts::PI;

use quasix_core::filter::{FilterLab, PipelineParams};
use quasix_core::lattice::Chain;
use quasix_core::linalg::{self, CMat, LanczosOptions};
use quasix_core::models::{build_model, lr_constants, lr_velocity, LocalHamiltonian, ModelKind};
use quasix_core::ops::{parse_product, RegionOperator};
use quasix_core::scalar::C;
use quasix_core::sector::{lr_commutator_check, norm_bound_check, DenseEigen, SolveMode, Spectrum};
use quasix_core::spectral::{default_grid, dynamic_correlation, peak_weights, sum_rule};
use quasix_mps::{aklt_tensor, continuum_edges, converge, dispersion_scan, transfer_fixed_points};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{parse_params, Command, RunConfig};
use crate::momentum::{exact, to_grid, MomentumMap};
use crate::output::Table;
use crate::CliError;

/// Tables plus the values that go into the metadata.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub constants: BTreeMap<String, f64>,
    pub momenta: Vec<MomentumMap>,
    pub info: serde_json::Map<String, Value>,
}

fn model(cfg: &RunConfig) -> Result<LocalHamiltonian<f64>, CliError> {
    let kind: ModelKind = cfg.model.as_deref().unwrap().parse()?;
    let params = parse_params(kind, cfg.params.as_deref().unwrap())?;
    Ok(build_model(kind, &params, cfg.sites.unwrap())?)
}

/// Named product (`sz0*sx1`) or `random<k>`: a seeded random Hermitian operator on sites 0..k.
pub fn build_operator(spec: &str, chain: Chain, seed: u64) -> Result<RegionOperator<f64>, CliError> {
    if let Some(k) = spec.strip_prefix("random") {
        let k: usize = k.parse().map_err(|_| CliError::Config(format!("bad operator `{spec}`")))?;
        if k == 0 || k > chain.n / 2 {
            return Err(CliError::Config(format!("random operator support {k} out of range")));
        }
        let dim = chain.d.pow(k as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMat::<f64>::from_fn(dim, dim, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = linalg::scale(&linalg::add(&a, &linalg::adjoint(&a)), C::new(0.5, 0.0));
        return Ok(RegionOperator::new(chain, (0..k).collect(), h)?.with_label(spec));
    }
    Ok(parse_product(spec, chain)?)
}

/// Grid momenta selected by --momentum-index / --p, or `fallback`.
fn sector_selection(cfg: &RunConfig, fallback: Vec<usize>) -> Result<(Vec<usize>, Vec<MomentumMap>), CliError> {
    let n = cfg.sites.unwrap();
    if let Some(k) = cfg.momentum_index {
        let m = MomentumMap { spec: format!("index {k}"), requested: 2.0 * PI * k as f64 / n as f64, grid: Some(n), index: Some(k), p: 2.0 * PI * k as f64 / n as f64 };
        return Ok((vec![k], vec![m]));
    }
    if let Some(ps) = &cfg.p {
        let maps: Vec<MomentumMap> = ps.iter().map(|s| to_grid(s, n)).collect::<Result<_, _>>()?;
        return Ok((maps.iter().map(|m| m.index.unwrap()).collect(), maps));
    }
    Ok((fallback, Vec::new()))
}

fn lr_block(h: &LocalHamiltonian<f64>, mu: f64, delta_e: f64, gap: f64, c: Option<f64>) -> Result<BTreeMap<String, f64>, CliError> {
    let s = lr_constants(h, mu)?;
    let mut m = BTreeMap::new();
    m.insert("mu".into(), mu);
    m.insert("s".into(), s);
    m.insert("v_lr".into(), lr_velocity(delta_e, s, mu));
    m.insert("delta_e".into(), delta_e);
    m.insert("gap".into(), gap);
    if let Some(c) = c {
        m.insert("c".into(), c);
    }
    Ok(m)
}

pub fn execute(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match cfg.command.unwrap() {
        Command::Spectrum => spectrum(cfg),
        Command::Filter => filter(cfg),
        Command::Dispersion => dispersion(cfg),
        Command::Converge => converge_cmd(cfg),
        Command::Spectralfn => spectralfn(cfg),
        Command::Lrcheck => lrcheck(cfg),
    }
}

fn spectrum(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let h = model(cfg)?;
    let mode = cfg.lowest.map_or(SolveMode::Full, SolveMode::LowestK);
    let n = h.n();
    let (ks, momenta) = sector_selection(cfg, (0..n).collect())?;
    let spec = Spectrum::solve_sectors(&h, quasix_core::sector::OrbitTable::new(h.chain)?, &ks, mode, &LanczosOptions::default())?;
    let mut t = Table::new("", &["p_index", "p", "alpha", "energy"]);
    for (sector, eig) in spec.sectors.iter().zip(&spec.eig) {
        if !ks.contains(&eig.k) {
            continue;
        }
        for (a, &e) in eig.energies.iter().enumerate() {
            t.push(vec![eig.k.into(), sector.p().into(), a.into(), e.into()]);
        }
    }
    let gap = spec.gap();
    t.note("ground_energy", format!("{:?}", spec.raw_ground_energy));
    let mut art = Artifacts { constants: lr_block(&h, cfg.mu.unwrap(), gap, gap, None)?, momenta, ..Default::default() };
    art.info.insert("ground_energy".into(), json!(spec.raw_ground_energy));
    art.info.insert("solver".into(), json!(if cfg.lowest.is_some() { "lanczos" } else { "dense" }));
    art.tables.push(t);
    Ok(art)
}

fn filter(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let h = model(cfg)?;
    let n = h.n();
    let lab = FilterLab::new(h)?;
    let (ks, momenta) = sector_selection(cfg, vec![n / 2])?;
    if ks.len() != 1 {
        return Err(CliError::Config("filter takes a single momentum".into()));
    }
    let target = lab.target(ks[0], cfg.alpha.unwrap())?;
    let op = build_operator(cfg.op.as_deref().unwrap(), lab.h.chain, cfg.seed.unwrap())?;
    let params = PipelineParams { mu: cfg.mu.unwrap(), c: cfg.c.unwrap(), delta_e: cfg.delta_e, ..PipelineParams::default() };
    let mut ells = cfg.ells.clone().unwrap_or_else(|| (1..=cfg.lmax.unwrap()).collect());
    ells.sort_unstable();
    ells.dedup();
    if ells.first() == Some(&0) {
        return Err(CliError::Config("radii start at 1".into()));
    }
    let scan = lab.scan_ells(&op, &target, &ells, &params)?;
    let mut t = Table::new(
        "",
        &["ell", "T", "q", "overlap", "norm", "seminorm", "F", "bound", "f", "DX", "loc_error", "loc_bound", "ell0_ok"],
    );
    for r in &scan.reports {
        t.push(vec![
            r.ell.into(),
            r.t.into(),
            r.q.into(),
            r.overlap.into(),
            r.norm.into(),
            r.seminorm.into(),
            r.fidelity.into(),
            r.bound.into(),
            r.f.into(),
            r.dx.into(),
            r.loc_error.into(),
            r.loc_bound.into(),
            r.ell0_ok.into(),
        ]);
    }
    let fs: Vec<f64> = std::iter::once(scan.f0_fidelity).chain(scan.reports.iter().map(|r| r.fidelity)).collect();
    let nondecreasing = fs.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    t.note("F0", format!("{:?}", scan.f0_fidelity));
    t.note("F_nondecreasing", nondecreasing);
    t.note("bound_flag", scan.bound_flag);
    t.note("target", format!("k={} alpha={} E={:?} isolation_gap={:?}", target.k, target.alpha, target.energy, target.delta_e));
    let delta_e = params.delta_e.unwrap_or(target.delta_e);
    let mut art = Artifacts { constants: lr_block(&lab.h, params.mu, delta_e, lab.spectrum.gap(), Some(params.c))?, momenta, ..Default::default() };
    art.info.insert("F0".into(), json!(scan.f0_fidelity));
    art.info.insert("f".into(), json!(scan.f));
    art.info.insert("F_nondecreasing".into(), json!(nondecreasing));
    art.info.insert("bound_flag".into(), json!(scan.bound_flag));
    art.info.insert("delta_e_overstated".into(), json!(scan.delta_e_overstated));
    art.info.insert("target".into(), json!({"k": target.k, "alpha": target.alpha, "energy": target.energy, "isolation_gap": target.delta_e}));
    art.tables.push(t);
    Ok(art)
}

fn mps_constants() -> Result<BTreeMap<String, f64>, CliError> {
    let fp = transfer_fixed_points(&aklt_tensor::<f64>())?;
    let mut m = BTreeMap::new();
    m.insert("bond_dim".into(), 2.0);
    m.insert("transfer_gap_ratio".into(), fp.gap_ratio);
    Ok(m)
}

fn dispersion(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let m = cfg.pgrid.unwrap();
    let (grid, momenta, full) = match &cfg.p {
        Some(ps) => {
            let maps: Vec<MomentumMap> = ps.iter().map(|s| to_grid(s, m)).collect::<Result<_, _>>()?;
            (maps.iter().map(|x| x.p).collect::<Vec<f64>>(), maps, false)
        }
        None => ((0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect(), Vec::new(), true),
    };
    let ells: Vec<usize> = (1..=cfg.lmax.unwrap()).collect();
    let keep = cfg.levels.unwrap();
    let bands = dispersion_scan(&aklt_tensor(), &quasix_core::models::aklt_bond(), &ells, &grid, keep)?;
    let mut t = Table::new("", &["p", "ell", "level", "energy", "degeneracy", "rank"]);
    for band in &bands {
        for pt in &band.points {
            for (lvl, (e, deg)) in pt.levels.levels().into_iter().enumerate().take(keep) {
                t.push(vec![pt.p.into(), band.ell.into(), lvl.into(), e.into(), deg.into(), pt.levels.rank.into()]);
            }
        }
    }
    let mut art = Artifacts { constants: mps_constants()?, momenta, ..Default::default() };
    let worst_herm = bands.iter().flat_map(|b| b.points.iter().map(|p| p.levels.hermiticity)).fold(0.0, f64::max);
    art.info.insert("max_hermiticity_residual".into(), json!(worst_herm));
    art.tables.push(t);
    if full {
        let top = bands.last().unwrap();
        let edges = continuum_edges(&top.emin(), &grid);
        let mut c = Table::new("continuum", &["p", "one", "two", "three"]);
        c.note("source_ell", top.ell);
        for (i, &p) in grid.iter().enumerate() {
            c.push(vec![p.into(), top.points[i].levels.min().into(), edges.two[i].into(), edges.three[i].into()]);
        }
        art.tables.push(c);
    }
    Ok(art)
}

fn converge_cmd(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let momenta: Vec<MomentumMap> = cfg.p.as_ref().unwrap().iter().map(|s| exact(s)).collect::<Result<_, _>>()?;
    let ps: Vec<f64> = momenta.iter().map(|m| m.p).collect();
    let table = converge(&aklt_tensor(), &quasix_core::models::aklt_bond(), &ps, cfg.lmax.unwrap())?;
    let mut t = Table::new("", &["p", "ell", "Emin", "diff_to_next"]);
    for row in &table.rows {
        for (i, &e) in row.emin.iter().enumerate() {
            t.push(vec![row.p.into(), (i + 1).into(), e.into(), row.diffs.get(i).copied().into()]);
        }
    }
    let mut rows = Vec::new();
    for (m, row) in momenta.iter().zip(&table.rows) {
        t.note(&format!("borderline[{}]", m.spec), row.borderline);
        rows.push(json!({"p": row.p, "spec": m.spec, "ratios": row.ratios, "borderline": row.borderline}));
    }
    t.note("slowest", &momenta[table.slowest].spec);
    let mut art = Artifacts { constants: mps_constants()?, momenta, ..Default::default() };
    art.info.insert("rows".into(), Value::Array(rows));
    art.info.insert("slowest".into(), json!(table.slowest));
    art.tables.push(t);
    Ok(art)
}

fn spectralfn(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let h = model(cfg)?;
    let n = h.n();
    let spec = Spectrum::solve(&h, SolveMode::Full, &LanczosOptions::default())?;
    let (ks, momenta) = sector_selection(cfg, (0..n).collect())?;
    let op = build_operator(cfg.op.as_deref().unwrap(), h.chain, cfg.seed.unwrap())?;
    let op = op.shifted(spec.ground_expectation(&op));
    let gap = spec.gap();
    let emax = spec.eig.iter().flat_map(|e| e.energies.iter().copied()).fold(0.0, f64::max);
    let (omega, eps0) = default_grid(gap, emax, cfg.omega_points.unwrap());
    let eps = cfg.eps.unwrap_or(eps0);
    let mut t = Table::new("", &["p", "omega", "reD", "imD", "S"]);
    let mut res = Table::new("residues", &["p", "energy", "weight"]);
    let mut sums = Vec::new();
    for &k in &ks {
        let line = dynamic_correlation(&spec, &op, k, &omega, eps)?;
        for ((w, d), s) in line.omega.iter().zip(&line.d).zip(&line.s) {
            t.push(vec![line.p.into(), (*w).into(), d.re.into(), d.im.into(), (*s).into()]);
        }
        let weights = peak_weights(&spec, &op, k)?;
        let total: f64 = weights.iter().map(|w| w.1).sum();
        for (e, w) in weights {
            res.push(vec![line.p.into(), e.into(), w.into()]);
        }
        sums.push(json!({"k": k, "p": line.p, "integral": sum_rule(&line), "total_weight": total}));
    }
    t.note("eps", format!("{eps:?}"));
    let mut art = Artifacts { constants: lr_block(&h, cfg.mu.unwrap(), gap, gap, None)?, momenta, ..Default::default() };
    art.info.insert("eps".into(), json!(eps));
    art.info.insert("sum_rule".into(), Value::Array(sums));
    art.tables.push(t);
    art.tables.push(res);
    Ok(art)
}

fn lrcheck(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let h = model(cfg)?;
    let n = h.n();
    let mu = cfg.mu.unwrap();
    let s = lr_constants(&h, mu)?;
    let dyn_ = DenseEigen::new(&h)?;
    let a = build_operator(cfg.op.as_deref().unwrap(), h.chain, cfg.seed.unwrap())?;
    let b0 = build_operator(cfg.op_b.as_deref().unwrap(), h.chain, cfg.seed.unwrap().wrapping_add(1))?;
    let xmax = *a.sites.iter().max().unwrap();
    let mut t = Table::new("", &["dist", "t", "lhs", "rhs", "holds"]);
    let mut all = true;
    for &d in cfg.dist.as_ref().unwrap() {
        let sites: Vec<usize> = b0.sites.iter().map(|x| (x + xmax + d) % n).collect();
        let b = RegionOperator::new(h.chain, sites, b0.matrix.clone())?;
        let real = a.region().dist(&b.region());
        if real != d {
            return Err(CliError::Config(format!("distance {d} does not fit on {n} sites (got {real})")));
        }
        for &time in cfg.times.as_ref().unwrap() {
            let c = lr_commutator_check(&a, &b, time, &dyn_, mu, s)?;
            all &= c.holds;
            t.push(vec![d.into(), time.into(), c.lhs.into(), c.rhs.into(), c.holds.into()]);
        }
    }
    t.note("all_hold", all);
    let spec = Spectrum::solve(&h, SolveMode::Full, &LanczosOptions::default())?;
    let gap = spec.gap();
    let delta = cfg.delta_e.unwrap_or(gap);
    let mut nb = Table::new("normbound", &["p_index", "p", "lhs", "rhs", "holds"]);
    let mut nb_all = true;
    for (sector, eig) in spec.sectors.iter().zip(&spec.eig) {
        let c = norm_bound_check(&spec, &a, eig.k, delta)?;
        nb_all &= c.holds;
        nb.push(vec![eig.k.into(), sector.p().into(), c.lhs.into(), c.rhs.into(), c.holds.into()]);
    }
    nb.note("delta", format!("{delta:?}"));
    nb.note("all_hold", nb_all);
    let mut art = Artifacts { constants: lr_block(&h, mu, delta, gap, None)?, ..Default::default() };
    art.info.insert("lr_all_hold".into(), json!(all));
    art.info.insert("norm_bound_all_hold".into(), json!(nb_all));
    art.tables.push(t);
    art.tables.push(nb);
    Ok(art)
}

