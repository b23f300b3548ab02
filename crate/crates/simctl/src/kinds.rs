use effective_expansion::{
    effective_band, effective_hamiltonian, exact_ground_sector_spectrum, extract_plaquette_coefficient, finite_l_series,
    predicted, spectral_residual, table, EffectiveSeries, SeriesOptions, TermClass,
};
use hamiltonian_forge::{
    assemble_model, AuxFill, LinkOps, ManifestEntry, MatterSpec, ModelConfig, ModelSpec, Theory,
};
use lattice_core::chain;
use spectra_lab::{flux_tube_scan, project_to_sector, string_tension, sweep, SweepConfig};

use crate::config::{missing, ExperimentConfig, GeometryBlock};
use crate::experiment::{Experiment, Planned, RunContext};
use crate::invariants::{eigenvector_sharpness, fermion_algebra, gauge_checks, link_algebra, Check};
use crate::output::{push_levels, spectra_table, Bundle, Cell, Table};
use crate::SimError;

/// Largest basis on which the audit also diagonalizes the full `H`.
const SHARPNESS_DIM: usize = 4096;

fn single(label: &str, model: ModelConfig) -> Vec<Planned> {
    vec![Planned { label: label.into(), model, upper_bound: false }]
}

fn sector_label(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("gauss={}", parts.join(";"))
}

pub struct Audit;

impl Experiment for Audit {
    fn kind(&self) -> &'static str {
        "audit"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        Ok(single("model", cfg.model(cfg.matter.clone().unwrap_or_default())?))
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Bundle, SimError> {
        let model = self.plan(cfg)?.remove(0).model;
        let a = assemble_model(&model)?;
        let mut t = Table::new(format!("audit_{}.csv", cfg.tag()), &["group", "term", "vertex", "check", "value", "tolerance", "pass"]);
        let mut push = |group: &str, term: &str, vertex: Option<usize>, c: &Check| {
            t.push(vec![
                group.into(),
                term.into(),
                vertex.map_or(Cell::Empty, Cell::from),
                c.name.as_str().into(),
                c.value.into(),
                c.tolerance.into(),
                c.pass().into(),
            ]);
            c.pass()
        };
        let mut failed = 0usize;
        let mut total = 0usize;
        let mut tally = |ok: bool| {
            total += 1;
            failed += usize::from(!ok);
        };
        for c in link_algebra(model.theory)? {
            tally(push("link", "", None, &c));
        }
        for c in fermion_algebra() {
            tally(push("fermion", "", None, &c));
        }
        for (term, v, c) in gauge_checks(&a) {
            tally(push("gauge", &term, v, &c));
        }
        let mut b = Bundle::default();
        if a.basis.dim() <= SHARPNESS_DIM {
            let c = eigenvector_sharpness(&a, &ctx.solvers)?;
            tally(push("sector", "H", None, &c));
        } else {
            b.warnings.push(format!("basis dim {} above {SHARPNESS_DIM}: eigenvector sharpness skipped", a.basis.dim()));
        }
        b.note("checks", total);
        b.note("failed", failed);
        b.note("basis_dim", a.basis.dim());
        b.terms = a.manifest();
        b.warnings.extend(a.warnings.iter().cloned());
        b.tables.push(t);
        Ok(b)
    }
}

pub struct Schwinger;

impl Schwinger {
    fn model(cfg: &ExperimentConfig) -> Result<ModelConfig, SimError> {
        let matter = cfg.matter.clone().unwrap_or(MatterSpec { dynamic: true, ..Default::default() });
        if !matter.dynamic || matter.auxiliary {
            return Err(SimError::Config("schwinger needs dynamic matter and no auxiliary fermions".into()));
        }
        if !matches!(cfg.theory()?, Theory::U1 { .. }) {
            return Err(SimError::Config("schwinger needs a u1 theory".into()));
        }
        cfg.couplings()?;
        let m = cfg.model(matter)?;
        if m.geometry.spatial_dim != 1 {
            return Err(SimError::Config("schwinger runs on a one-dimensional chain".into()));
        }
        Ok(m)
    }
}

impl Experiment for Schwinger {
    fn kind(&self) -> &'static str {
        "schwinger"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        Ok(single("chain", Self::model(cfg)?))
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Bundle, SimError> {
        let a = assemble_model(&Self::model(cfg)?)?;
        let nv = a.spec.geometry.n_vertices();
        let targets = cfg.sector.gauss_values.clone().unwrap_or_else(|| a.spec.default_gauss_targets());
        if targets.len() != nv {
            return Err(SimError::Config(format!("{} gauss values for {nv} vertices", targets.len())));
        }
        let h = project_to_sector(&a.total(), |s| a.spec.in_gauss_sector(s, &targets))?;
        if h.dim() == 0 {
            return Err(SimError::Config("the requested Gauss sector is empty".into()));
        }
        let w = ctx.solvers.get(&cfg.solver.mode)?.solve(&h, &cfg.solver.request())?;
        let mut t = spectra_table(&cfg.tag());
        push_levels(&mut t, "H", &sector_label(&targets), &w.values);
        let mut b = Bundle::default();
        b.note("ground_energy", w.values[0]);
        b.note("sector_dim", h.dim());
        b.note("basis_dim", a.basis.dim());
        b.note("solver", w.solver);
        b.note("max_residual", w.residuals.iter().copied().fold(0.0, f64::max));
        b.terms = a.manifest();
        b.warnings.extend(a.warnings.iter().cloned());
        b.tables.push(t);
        Ok(b)
    }
}

/// Theories each loop kind accepts.
#[derive(Clone, Copy)]
enum LoopFamily {
    Zn,
    U1,
    Su2,
}

fn loop_model(cfg: &ExperimentConfig, family: LoopFamily) -> Result<ModelConfig, SimError> {
    let theory = cfg.theory()?;
    let ok = match family {
        LoopFamily::Zn => matches!(theory, Theory::Zn { .. } | Theory::U1Proxy { .. }),
        LoopFamily::U1 => matches!(theory, Theory::U1 { .. }),
        LoopFamily::Su2 => matches!(theory, Theory::Su2 { .. }),
    };
    if !ok {
        return Err(SimError::Config(format!("kind {} does not accept theory {theory:?}", cfg.kind)));
    }
    let c = cfg.couplings()?;
    if c.eps == 0.0 || c.lambda <= 0.0 {
        return Err(SimError::Config("loop method needs eps != 0 and lambda > 0".into()));
    }
    let matter = cfg.matter.clone().unwrap_or(MatterSpec { auxiliary: true, aux_fill: AuxFill::Pure, ..Default::default() });
    if !matter.auxiliary {
        return Err(SimError::Config("loop method needs auxiliary matter".into()));
    }
    cfg.model(matter)
}

fn loop_manifest(spec: &ModelSpec) -> Vec<ManifestEntry> {
    let c = &spec.couplings;
    let e = |term: &str, coefficient: f64, formula: &str| ManifestEntry {
        term: term.into(),
        coefficient,
        formula: formula.into(),
    };
    let electric = match spec.links {
        LinkOps::Zn(_) => "-(mu/2) sum (P + P^dag)",
        LinkOps::Su2(..) => "sum (g_L L^2 + g_R R^2)/2, g_L = g_R = mu",
        _ => "mu sum E^2",
    };
    let constraint = if spec.zn_aux() {
        e("H_C", c.lambda, "lambda sum N_v (N_v - 1)")
    } else {
        e("H_C", -c.lambda, "-lambda sum (F_psi psi^dag psi + F_chi chi^dag chi)")
    };
    vec![e("H_E", c.mu, electric), e("H_int", c.eps, "eps sum (psi^dag U psi + h.c.)"), constraint]
}

fn run_loop(cfg: &ExperimentConfig, family: LoopFamily) -> Result<Bundle, SimError> {
    let spec = ModelSpec::new(&loop_model(cfg, family)?)?;
    let sb = cfg.series();
    let opts = SeriesOptions { order: sb.order, link_cap: sb.link_cap, gap_tol: sb.gap_tol, dim_cap: cfg.dim_cap };
    let mut b = Bundle::default();
    let series: EffectiveSeries = match family {
        LoopFamily::U1 => {
            let r = finite_l_series(&spec, &opts)?;
            b.note("finite_l", r.summary);
            r.series
        }
        _ => effective_hamiltonian(&spec, &opts)?,
    };
    let mut dt = Table::new("effective_decomposition.csv", &["order", "class", "predicted", "measured", "residual_norm"]);
    for r in table(&series.decomposition) {
        dt.push(vec![r.order.into(), r.class.into(), r.predicted.into(), r.measured.into(), r.residual_norm.into()]);
    }
    let mut st = spectra_table(&cfg.tag());
    let bands: Vec<Vec<f64>> = (1..=sb.order).map(|n| effective_band(&series, n)).collect::<Result<_, _>>()?;
    for (n, band) in bands.iter().enumerate() {
        push_levels(&mut st, &format!("effective_order{}", n + 1), "ground", band);
    }
    let c = &spec.couplings;
    match extract_plaquette_coefficient(&series) {
        Ok(est) => {
            b.note("plaquette_coefficient", est.value);
            b.note("plaquette_uncertainty", est.uncertainty);
            b.note("plaquette_predicted", predicted(&spec, 4, TermClass::Plaquette));
            if let LinkOps::Su2(..) = spec.links {
                b.note("xi_measured", est.value / (-2.0 * c.eps.powi(4) / c.lambda.powi(3)));
            }
        }
        Err(e) => b.warnings.push(format!("plaquette coefficient unavailable: {e}")),
    }
    if let (LinkOps::Zn(z), true) = (spec.links, series.decomposition.len() >= 3) {
        let m = series.decomposition[0].measured(TermClass::Electric) + series.decomposition[2].measured(TermClass::Electric);
        let s2 = (z.delta() / 2.0).sin().powi(2);
        b.note("mu_ren", m);
        b.note("mu_ren_predicted", c.mu * (1.0 - 2.0 * c.eps * c.eps / (c.lambda * c.lambda) * s2));
    }
    b.note("seed_dim", series.basis.dim());
    b.note("working_dim", series.working_dim);
    b.note("constraint_shift", series.shift);
    if sb.exact {
        let ex = exact_ground_sector_spectrum(&spec, sb.link_cap, cfg.dim_cap)?;
        push_levels(&mut st, "exact", "ground", &ex.band);
        b.note("exact_sector_dim", ex.sector_dim);
        let residuals: Vec<f64> = bands.iter().map(|band| spectral_residual(&ex.band, band)).collect();
        b.note("spectral_residual_by_order", &residuals);
        if cfg.output.plots {
            let mut p = Table::new("plots/effective_vs_exact.csv", &["level", "exact", "effective"]);
            let top = bands.last().expect("order >= 1");
            for (i, (e, f)) in ex.band.iter().zip(top).enumerate() {
                p.push(vec![i.into(), (*e).into(), (*f).into()]);
            }
            b.tables.push(p);
        }
    }
    b.terms = loop_manifest(&spec);
    b.tables.insert(0, dt);
    b.tables.insert(0, st);
    Ok(b)
}

fn loop_plan(cfg: &ExperimentConfig, family: LoopFamily) -> Result<Vec<Planned>, SimError> {
    let model = loop_model(cfg, family)?;
    Ok(vec![Planned { label: "loop".into(), model, upper_bound: true }])
}

pub struct LoopZn;

impl Experiment for LoopZn {
    fn kind(&self) -> &'static str {
        "loop_zN"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        loop_plan(cfg, LoopFamily::Zn)
    }

    fn run(&self, cfg: &ExperimentConfig, _ctx: &RunContext) -> Result<Bundle, SimError> {
        run_loop(cfg, LoopFamily::Zn)
    }
}

pub struct LoopU1FiniteL;

impl Experiment for LoopU1FiniteL {
    fn kind(&self) -> &'static str {
        "loop_u1_finite_l"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        loop_plan(cfg, LoopFamily::U1)
    }

    fn run(&self, cfg: &ExperimentConfig, _ctx: &RunContext) -> Result<Bundle, SimError> {
        run_loop(cfg, LoopFamily::U1)
    }
}

pub struct LoopSu2;

impl Experiment for LoopSu2 {
    fn kind(&self) -> &'static str {
        "loop_su2"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        loop_plan(cfg, LoopFamily::Su2)
    }

    fn run(&self, cfg: &ExperimentConfig, _ctx: &RunContext) -> Result<Bundle, SimError> {
        run_loop(cfg, LoopFamily::Su2)
    }
}

pub struct SweepXd;

impl SweepXd {
    fn setup(cfg: &ExperimentConfig) -> Result<(SweepConfig, GeometryBlock), SimError> {
        let sc = cfg.sweep.clone().ok_or_else(|| missing(&cfg.kind, "sweep"))?;
        if sc.ells.is_empty() || sc.xs.is_empty() {
            return Err(SimError::Config("sweep needs at least one ell and one x".into()));
        }
        if sc.eps == 0.0 || sc.lambda <= 0.0 {
            return Err(SimError::Config("sweep needs eps != 0 and lambda > 0".into()));
        }
        if sc.ells.contains(&0) {
            return Err(SimError::Config("ell must be at least 1".into()));
        }
        Ok((sc, cfg.geometry.clone().unwrap_or_else(GeometryBlock::single_plaquette)))
    }
}

impl Experiment for SweepXd {
    fn kind(&self) -> &'static str {
        "sweep_xd"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        let (sc, g) = Self::setup(cfg)?;
        let geom = g.build()?;
        Ok(sc
            .ells
            .iter()
            .map(|&ell| {
                let mut model = ModelConfig::new(geom.clone(), Theory::U1 { ell })
                    .with_matter(MatterSpec { auxiliary: true, ..Default::default() });
                model.dim_cap = sc.dim_cap;
                Planned { label: format!("ell={ell}"), model, upper_bound: true }
            })
            .collect())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Bundle, SimError> {
        let (sc, g) = Self::setup(cfg)?;
        ctx.solvers.get(&sc.solver)?;
        let r = sweep(&sc, &g.build()?)?;
        let mut summary = Table::new(
            "sweep_summary.csv",
            &["x", "ell", "beta", "eps", "lambda", "d", "mean_shift", "scale_mismatch", "dims", "seconds"],
        );
        let mut surface = Table::new("plots/d_surface.csv", &["x", "ell", "d", "d_reference", "scale_ratio"]);
        let mut levels = Table::new("plots/levels.csv", &["ell", "x", "level", "E", "E_tilde"]);
        let mut st = spectra_table(&cfg.tag());
        for p in &r.points {
            summary.push(vec![
                p.x.into(),
                p.ell.into(),
                p.beta.into(),
                p.eps.into(),
                p.lambda.into(),
                p.d.into(),
                p.mean_shift.into(),
                p.scale_mismatch.into(),
                p.dims.into(),
                p.seconds.into(),
            ]);
            surface.push(vec![p.x.into(), p.ell.into(), p.d.into(), p.d_reference.into(), p.scale_ratio.into()]);
            for (i, (e, t)) in p.levels.iter().zip(&p.target).enumerate() {
                levels.push(vec![p.ell.into(), p.x.into(), i.into(), (*e).into(), (*t).into()]);
            }
            let sector = format!("ell={};x={}", p.ell, p.x);
            push_levels(&mut st, "simulator", &sector, &p.levels);
            push_levels(&mut st, "target", &sector, &p.target);
        }
        let mut b = Bundle::default();
        let (x_lo, x_hi) = sc.xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let ordering: Vec<serde_json::Value> = sc
            .ells
            .iter()
            .map(|&ell| {
                let lo = r.at(ell, x_lo).map(|p| p.d);
                let hi = r.at(ell, x_hi).map(|p| p.d);
                serde_json::json!({ "ell": ell, "d_smallest_x": lo, "d_largest_x": hi,
                    "decreasing": matches!((lo, hi), (Some(a), Some(b)) if b < a) })
            })
            .collect();
        b.note("ordering", ordering);
        b.note("all_finite", r.points.iter().all(|p| p.d.is_finite()));
        b.note("mismatch_at_smallest_x", r.points.iter().filter(|p| p.x == x_lo).all(|p| p.scale_mismatch));
        b.note("points", r.points.len());
        b.tables.push(summary);
        b.tables.push(st);
        if cfg.output.plots {
            b.tables.push(surface);
            b.tables.push(levels);
        }
        Ok(b)
    }
}

pub struct FluxTube;

impl FluxTube {
    fn setup(cfg: &ExperimentConfig) -> Result<(Theory, f64, Vec<usize>, usize), SimError> {
        let theory = cfg.theory()?;
        if !matches!(theory, Theory::U1 { .. } | Theory::Su2 { .. }) {
            return Err(SimError::Config("fluxtube supports u1 and su2".into()));
        }
        let ft = cfg.fluxtube.clone().ok_or_else(|| missing(&cfg.kind, "fluxtube"))?;
        if let Some(&r) = ft.separations.iter().find(|&&r| r + 1 > ft.sites) {
            return Err(SimError::Config(format!("separation {r} does not fit on {} sites", ft.sites)));
        }
        let g2 = cfg.couplings.as_ref().map_or(2.0, |c| c.g2);
        Ok((theory, g2, ft.separations, ft.sites))
    }
}

impl Experiment for FluxTube {
    fn kind(&self) -> &'static str {
        "fluxtube"
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError> {
        let (theory, _, seps, sites) = Self::setup(cfg)?;
        let mut model = ModelConfig::new(chain(sites).map_err(|e| SimError::Config(e.to_string()))?, theory);
        model.dim_cap = cfg.dim_cap;
        if let Theory::Su2 { .. } = theory {
            let r = seps.iter().copied().max().unwrap_or(0);
            model.matter = MatterSpec { dynamic: true, static_sites: Some(vec![0, r]), ..Default::default() };
            model.link_budget = Some(r as u32);
        }
        Ok(single("chain", model))
    }

    fn run(&self, cfg: &ExperimentConfig, _ctx: &RunContext) -> Result<Bundle, SimError> {
        let (theory, g2, seps, sites) = Self::setup(cfg)?;
        let t = flux_tube_scan(theory, g2, &seps, sites)?;
        let mut st = spectra_table(&cfg.tag());
        let mut plot = Table::new("plots/fluxtube.csv", &["r", "energy"]);
        for p in &t.points {
            push_levels(&mut st, "V", &format!("R={}", p.r), &[p.energy]);
            plot.push(vec![p.r.into(), p.energy.into()]);
        }
        let mut b = Bundle::default();
        b.note("vacuum", t.vacuum);
        b.note("g2", g2);
        b.note("points", &t.points);
        if t.points.len() >= 2 {
            let fit = string_tension(&t.points)?;
            b.note("string_tension", fit.slope);
            b.note("intercept", fit.intercept);
        }
        b.tables.push(st);
        if cfg.output.plots {
            b.tables.push(plot);
        }
        Ok(b)
    }
}
