use hamiltonian_forge::{CouplingIssue, ModelSpec, Theory};
use serde::{Deserialize, Serialize};
use spectra_lab::{beta_for_x, coupling_x};

use crate::config::ExperimentConfig;
use crate::experiment::ExperimentRegistry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyEstimate {
    pub label: String,
    pub bosonic: u128,
    pub fermionic: u128,
    pub total: u128,
    pub cap: usize,
    /// The run enumerates a reachable subset bounded by `total`.
    pub upper_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallTime {
    Seconds,
    Minutes,
    Hours,
}

impl WallTime {
    fn of(dim: u128) -> Self {
        match dim {
            0..=20_000 => WallTime::Seconds,
            20_001..=300_000 => WallTime::Minutes,
            _ => WallTime::Hours,
        }
    }
}

/// Couplings derived from the config (`μ = βε²/λ²`, `x`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DerivedCouplings {
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub g2: Option<f64>,
    pub x: Option<f64>,
    /// `(ℓ, x, β)` for every sweep point.
    pub sweep_beta: Vec<(u32, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub kind: String,
    pub ok: bool,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub assemblies: Vec<AssemblyEstimate>,
    pub wall_time: WallTime,
    pub derived: DerivedCouplings,
}

impl Diagnostics {
    /// Diagnostics for text that did not parse.
    pub fn unparsed(msg: String) -> Self {
        Self {
            kind: String::new(),
            ok: false,
            errors: vec![msg],
            warnings: Vec::new(),
            assemblies: Vec::new(),
            wall_time: WallTime::Seconds,
            derived: DerivedCouplings::default(),
        }
    }
}

const LOOP_KINDS: [&str; 3] = ["loop_zN", "loop_u1_finite_l", "loop_su2"];

/// Static checks, dimension estimates and derived couplings; never fails.
pub fn validate(cfg: &ExperimentConfig) -> Diagnostics {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut assemblies = Vec::new();
    let mut derived = DerivedCouplings::default();
    let registry = ExperimentRegistry::default();
    let is_loop = LOOP_KINDS.contains(&cfg.kind.as_str());

    if cfg.kind == "loop_zN" {
        if let Some(Ok(g)) = cfg.geometry.as_ref().map(|g| g.build()) {
            if g.n_plaquettes() == 0 {
                warnings.push("no plaquettes: the geometry has no plaquette, so no plaquette term can emerge".into());
            }
        }
    }
    match registry.get(&cfg.kind).and_then(|e| e.plan(cfg)) {
        Ok(plans) => {
            for p in plans {
                match ModelSpec::new(&p.model) {
                    Ok(spec) => {
                        let d = spec.estimate_dims();
                        let cap = p.model.dim_cap;
                        if d.total > cap as u128 {
                            let what = if p.upper_bound { "bound" } else { "estimate" };
                            warnings.push(format!("{}: dimension {what} {} exceeds cap {cap}", p.label, d.total));
                        }
                        assemblies.push(AssemblyEstimate {
                            label: p.label,
                            bosonic: d.bosonic,
                            fermionic: d.fermionic,
                            total: d.total,
                            cap,
                            upper_bound: p.upper_bound,
                        });
                    }
                    Err(e) => errors.push(format!("{}: {e}", p.label)),
                }
            }
        }
        Err(e) => errors.push(e.to_string()),
    }

    if let Some(c) = &cfg.couplings {
        let c = c.clone().resolved();
        derived.mu = Some(c.mu);
        derived.beta = c.beta;
        derived.g2 = Some(c.g2);
        if let (Some(beta), Some(Theory::U1 { ell })) = (c.beta, cfg.theory) {
            derived.x = coupling_x(c.lambda, c.eps, ell as u64, beta).ok();
        }
        let colours = cfg.theory.map_or(1, |t| t.colours());
        for issue in c.check(colours, is_loop || c.beta.is_some()) {
            match issue {
                CouplingIssue::BetaAboveOne => {
                    errors.push(format!("invariant violation: beta = {} breaks beta <= 1", c.beta.unwrap_or(f64::NAN)))
                }
                CouplingIssue::NonPositiveLambda if is_loop => errors.push("invariant violation: lambda must be positive".into()),
                CouplingIssue::NonPositiveLambda => {}
                CouplingIssue::XiNotAllowed => warnings.push(format!("xi_in = {} is neither 1 nor 1/N", c.xi_in)),
                CouplingIssue::MuMismatch => warnings.push("mu recomputed from beta".into()),
            }
        }
    }
    if let Some(sc) = &cfg.sweep {
        for &ell in &sc.ells {
            for &x in &sc.xs {
                if let Ok(b) = beta_for_x(x, sc.lambda, sc.eps, ell as u64) {
                    derived.sweep_beta.push((ell, x, b));
                    if b > 1.0 {
                        errors.push(format!("invariant violation: ell = {ell}, x = {x} needs beta = {b} > 1"));
                    }
                }
            }
        }
    }

    let largest = assemblies.iter().map(|a| a.total.min(a.cap as u128)).max().unwrap_or(0);
    let points = cfg.sweep.as_ref().map_or(1, |s| (s.ells.len() * s.xs.len()).max(1)) as u128;
    Diagnostics {
        kind: cfg.kind.clone(),
        ok: errors.is_empty(),
        errors,
        warnings,
        assemblies,
        wall_time: WallTime::of(largest.saturating_mul(points)),
        derived,
    }
}
