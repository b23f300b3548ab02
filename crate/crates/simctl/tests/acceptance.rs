//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use effective_expansion::*;
use fock_algebra::{SparseOperator, C64};
use gauge_links::{pauli, su2_link, u1_link, zn_link, LinkForm, Side};
use hamiltonian_forge::*;
use lattice_core::{chain, single_plaquette};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra_lab::*;

const GAUSS_TOL: f64 = 1e-12;
const GAUSS_BUDGET: Duration = Duration::from_secs(60);
const ZN_TOL: f64 = 1e-14;
const SU2_TOL: f64 = 1e-13;
const U1_LADDER_TOL: f64 = 1e-14;
const COEFF_REL_TOL: f64 = 1e-8;
const SERIES_BUDGET: Duration = Duration::from_secs(600);
const ODD_ORDER_TOL: f64 = 1e-12;
const Z3_RATIO: (f64, f64) = (40.0, 100.0);
const FINITE_L_EXPONENT: f64 = 4.0;
const FINITE_L_EXPONENT_TOL: f64 = 0.3;
const STRONG_TOL: f64 = 1e-12;
const FILTER_TOL: f64 = 1e-10;
const CLUSTER_TOL: f64 = 1e-9;
const ASSEMBLY_BUDGET: Duration = Duration::from_secs(60);
const LINEAR_DEVIATION: f64 = 0.1;
const TIME_EXPONENT: (f64, f64) = (0.6, 1.4);

const EPS: f64 = 0.1;
const LAMBDA: f64 = 10.0;
const BETA: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dynamic() -> MatterSpec {
    MatterSpec { dynamic: true, ..Default::default() }
}

fn auxiliary(fill: AuxFill) -> MatterSpec {
    MatterSpec { auxiliary: true, aux_fill: fill, ..Default::default() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn power(op: &SparseOperator, k: u32) -> SparseOperator {
    (0..k).fold(SparseOperator::identity(op.basis()), |acc, _| acc.mul(op).unwrap())
}

fn levi(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn gauge_suite() -> Vec<(String, ModelConfig)> {
    let cs = CouplingSet { g2: 1.3, mu: 0.65, eps: 0.4, lambda: 2.0, mass: 0.8, gamma: 0.6, counterterm: 0.35, ..Default::default() };
    let plaq = single_plaquette();
    let mut out = Vec::new();
    for ell in 1..=3 {
        let u1 = Theory::U1 { ell };
        out.push((format!("u1 l={ell} chain pure"), ModelConfig::new(chain(4).unwrap(), u1)));
        out.push((format!("u1 l={ell} chain dynamic"), ModelConfig::new(chain(4).unwrap(), u1).with_matter(dynamic())));
        out.push((format!("u1 l={ell} plaquette pure"), ModelConfig::new(plaq.clone(), u1).with_terms(&[TermKind::Electric, TermKind::Magnetic])));
        out.push((format!("u1 l={ell} plaquette aux"), ModelConfig::new(plaq.clone(), u1).with_matter(auxiliary(AuxFill::Pure))));
        out.push((
            format!("u1 l={ell} plaquette dynamic"),
            ModelConfig::new(plaq.clone(), u1).with_matter(dynamic()).with_terms(&[TermKind::Electric, TermKind::Magnetic, TermKind::Dirac]),
        ));
    }
    for n in [3, 5] {
        let zn = Theory::Zn { n };
        out.push((format!("z{n} plaquette pure"), ModelConfig::new(plaq.clone(), zn).with_terms(&[TermKind::Electric, TermKind::Magnetic])));
        out.push((format!("z{n} plaquette aux"), ModelConfig::new(plaq.clone(), zn).with_matter(auxiliary(AuxFill::Pure))));
        out.push((format!("z{n} plaquette dynamic"), ModelConfig::new(plaq.clone(), zn).with_matter(dynamic())));
    }
    let su2 = Theory::Su2 { n_max: 4, unitary: false };
    out.push(("su2 chain pure".into(), ModelConfig::new(chain(4).unwrap(), su2)));
    out.push(("su2 chain dynamic".into(), ModelConfig::new(chain(4).unwrap(), su2).with_matter(dynamic())));
    out.push(("su2 plaquette pure".into(), ModelConfig::new(plaq.clone(), su2).with_terms(&[TermKind::Electric, TermKind::Magnetic])));
    out.push(("su2 plaquette aux".into(), ModelConfig::new(plaq.clone(), su2).with_matter(auxiliary(AuxFill::Mixed))));
    out.push(("su2 plaquette dynamic".into(), ModelConfig::new(plaq, su2).with_matter(dynamic())));
    for (name, cfg) in &mut out {
        cfg.couplings = cs.clone();
        if name.starts_with("su2") {
            cfg.link_budget = Some(2);
        }
    }
    out
}

fn gauge_invariance() -> Outcome {
    let clock = Instant::now();
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    for (name, cfg) in gauge_suite() {
        let a = match assemble_model(&cfg) {
            Ok(a) => a,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        let mut d = gauss_defect(&a, &a.total());
        for (_, op) in &a.terms {
            d = d.max(gauss_defect(&a, op));
        }
        if d >= worst.0 {
            worst = (d, name);
        }
        count += 1;
    }
    let t = clock.elapsed();
    outcome(
        worst.0 <= GAUSS_TOL && t <= GAUSS_BUDGET,
        format!("{count} models, max defect {:.3e} ({}), {:.1}s", worst.0, worst.1, t.as_secs_f64()),
    )
}

fn algebra() -> Outcome {
    let mut zn_worst: f64 = 0.0;
    for n in [2, 3, 5, 8] {
        let z = zn_link(n).unwrap();
        let b = z.local_basis();
        let (p, q) = (z.p(&b), z.q_op(&b));
        let id = SparseOperator::identity(&b);
        let conj = p.adjoint().mul(&q).unwrap().mul(&p).unwrap();
        let rhs = q.scale(C64::from_polar(1.0, z.delta()));
        zn_worst = zn_worst
            .max(power(&p, n).max_abs_diff(&id).unwrap())
            .max(power(&q, n).max_abs_diff(&id).unwrap())
            .max(conj.max_abs_diff(&rhs).unwrap());
    }

    let s = su2_link(4).unwrap();
    let b = s.local_basis();
    let l: Vec<_> = (0..3).map(|a| s.generator_op(&b, 0, Side::Left, a)).collect();
    let r: Vec<_> = (0..3).map(|a| s.generator_op(&b, 0, Side::Right, a)).collect();
    let mut su2_worst: f64 = 0.0;
    for a in 0..3 {
        for bb in 0..3 {
            let mut want_l = SparseOperator::zero(&b);
            let mut want_r = SparseOperator::zero(&b);
            for cc in 0..3 {
                let e = levi(a, bb, cc);
                if e != 0.0 {
                    want_l = want_l.add(&l[cc].scale(C64::new(0.0, -e))).unwrap();
                    want_r = want_r.add(&r[cc].scale(C64::new(0.0, e))).unwrap();
                }
            }
            su2_worst = su2_worst
                .max(l[a].commutator(&l[bb]).unwrap().max_abs_diff(&want_l).unwrap())
                .max(r[a].commutator(&r[bb]).unwrap().max_abs_diff(&want_r).unwrap());
        }
    }
    // covariance holds below the occupation cap
    let safe: Vec<usize> = (0..b.dim()).filter(|&i| b.state(i)[0] + b.state(i)[1] < 4).collect();
    for form in [LinkForm::Unitary, LinkForm::Dressed] {
        let u: Vec<_> = (0..4).map(|k| s.entry_op(&b, 0, k / 2, k % 2, form, false)).collect();
        for a in 0..3 {
            let t = |i: usize, j: usize| pauli(a, i, j) * 0.5;
            for i in 0..2 {
                for j in 0..2 {
                    let lhs_l = l[a].commutator(&u[i * 2 + j]).unwrap();
                    let lhs_r = r[a].commutator(&u[i * 2 + j]).unwrap();
                    let mut rhs_l = SparseOperator::zero(&b);
                    let mut rhs_r = SparseOperator::zero(&b);
                    for k in 0..2 {
                        rhs_l = rhs_l.add(&u[k * 2 + j].scale(t(i, k))).unwrap();
                        rhs_r = rhs_r.add(&u[i * 2 + k].scale(t(k, j))).unwrap();
                    }
                    for &x in &safe {
                        for &y in &safe {
                            su2_worst = su2_worst
                                .max((lhs_l.get(x, y) - rhs_l.get(x, y)).norm())
                                .max((lhs_r.get(x, y) - rhs_r.get(x, y)).norm());
                        }
                    }
                }
            }
        }
    }

    let mut u1_worst: f64 = 0.0;
    for ell in 1..=8 {
        let link = u1_link(ell).unwrap();
        let b = link.local_basis();
        let lp = link.l_plus(&b);
        u1_worst = u1_worst.max(link.e(&b).commutator(&lp).unwrap().max_abs_diff(&lp).unwrap());
    }
    outcome(
        zn_worst <= ZN_TOL && su2_worst <= SU2_TOL && u1_worst <= U1_LADDER_TOL,
        format!("Z_N {zn_worst:.2e}, SU(2) {su2_worst:.2e}, U(1) {u1_worst:.2e}"),
    )
}

fn loop_spec(theory: Theory, fill: AuxFill, eps: f64, beta: f64) -> ModelSpec {
    let cfg = ModelConfig::new(single_plaquette(), theory)
        .with_matter(auxiliary(fill))
        .with_couplings(CouplingSet::loop_method(eps, LAMBDA, beta));
    ModelSpec::new(&cfg).unwrap()
}

fn series(spec: &ModelSpec, cap: Option<u32>) -> EffectiveSeries {
    let mut o = SeriesOptions::order(4);
    o.link_cap = cap;
    effective_hamiltonian(spec, &o).unwrap()
}

fn proxy(eps: f64) -> EffectiveSeries {
    series(&loop_spec(Theory::U1Proxy { n: 64 }, AuxFill::Pure, eps, BETA), Some(3))
}

fn su2_series(fill: AuxFill) -> EffectiveSeries {
    series(&loop_spec(Theory::Su2 { n_max: 4, unitary: true }, fill, EPS, BETA), Some(1))
}

fn coefficients() -> Outcome {
    let clock = Instant::now();
    let scale = EPS.powi(4) / LAMBDA.powi(3);
    let mut parts = Vec::new();
    let mut pass = true;
    let mut check = |label: &str, measured: f64, expected: f64| {
        let r = rel(measured, expected);
        pass &= r <= COEFF_REL_TOL;
        parts.push(format!("{label} {measured:.4e}/{expected:.4e}"));
    };

    let z3_spec = loop_spec(Theory::Zn { n: 3 }, AuxFill::Pure, EPS, BETA);
    let z3 = series(&z3_spec, None);
    check("Z3", extract_plaquette_coefficient(&z3).unwrap().value, -4.0 * scale);
    check("Z64", extract_plaquette_coefficient(&proxy(EPS)).unwrap().value, -2.0 * scale);
    for (fill, xi) in [(AuxFill::Pure, 1.0), (AuxFill::Mixed, 0.5)] {
        check(&format!("SU2 xi={xi}"), extract_plaquette_coefficient(&su2_series(fill)).unwrap().value, -2.0 * xi * scale);
    }
    let mu = z3_spec.couplings.mu;
    let delta = 2.0 * PI / 3.0;
    let mu_ren = mu * (1.0 - 2.0 * EPS * EPS / (LAMBDA * LAMBDA) * (delta / 2.0).sin().powi(2));
    let measured = z3.decomposition[0].measured(TermClass::Electric) + z3.decomposition[2].measured(TermClass::Electric);
    check("mu_ren", measured, mu_ren);
    let t = clock.elapsed();
    outcome(pass && t <= SERIES_BUDGET, format!("{}, {:.1}s", parts.join(", "), t.as_secs_f64()))
}

fn odd_orders() -> Outcome {
    let p = proxy(EPS);
    let mut second = non_constant_part(p.order(2).unwrap());
    for fill in [AuxFill::Pure, AuxFill::Mixed] {
        second = second.max(non_constant_part(su2_series(fill).order(2).unwrap()));
    }
    let third = non_constant_part(p.order(3).unwrap());
    outcome(second <= ODD_ORDER_TOL && third <= ODD_ORDER_TOL, format!("order 2 {second:.2e}, proxy order 3 {third:.2e}"))
}

fn scaling() -> Outcome {
    let z3 = |eps: f64| {
        let s = loop_spec(Theory::Zn { n: 3 }, AuxFill::Pure, eps, BETA);
        let exact = exact_ground_sector_spectrum(&s, None, 1 << 20).unwrap();
        spectral_residual(&exact.band, &effective_band(&series(&s, None), 4).unwrap())
    };
    let ratio = z3(0.1) / z3(0.05);
    // residual left once the order-≤2 terms (H̃_E and the constant) are removed
    let finite = |eps: f64| {
        let s = loop_spec(Theory::U1 { ell: 1 }, AuxFill::Pure, eps, BETA);
        let exact = exact_ground_sector_spectrum(&s, None, 1 << 20).unwrap();
        (eps, spectral_residual(&exact.band, &effective_band(&series(&s, None), 2).unwrap()))
    };
    let fit = fit_power(&[finite(0.05), finite(0.1), finite(0.2)]).unwrap();
    outcome(
        (Z3_RATIO.0..=Z3_RATIO.1).contains(&ratio) && (fit.exponent - FINITE_L_EXPONENT).abs() <= FINITE_L_EXPONENT_TOL,
        format!("Z3 r(0.1)/r(0.05) = {ratio:.2}, finite-l exponent {:.4}", fit.exponent),
    )
}

fn sweep_surface() -> Outcome {
    let result = match sweep(&SweepConfig::default(), &single_plaquette()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let finite = result.points.iter().all(|p| p.d.is_finite());
    let cfg = SweepConfig::default();
    let (lo, hi) = (cfg.xs[0], cfg.xs[cfg.xs.len() - 1]);
    let mut ordered = Vec::new();
    let mut mismatch = true;
    for &ell in &cfg.ells {
        let (a, b) = (result.at(ell, lo).unwrap(), result.at(ell, hi).unwrap());
        ordered.push(format!("l={ell} {:.2e}->{:.2e}", a.d, b.d));
        mismatch &= a.scale_mismatch;
        if b.d >= a.d {
            ordered.last_mut().unwrap().push('!');
        }
    }
    let all_ordered = !ordered.iter().any(|s| s.ends_with('!'));
    outcome(
        finite && all_ordered && mismatch,
        format!("finite {finite}, mismatch at x={lo} {mismatch}, d(x={lo})->d(x={hi}): {}", ordered.join(", ")),
    )
}

fn strong_coupling() -> Outcome {
    let u1 = flux_tube_scan(Theory::U1 { ell: 3 }, 2.0, &[1, 2, 3], 4).unwrap();
    let u1_dev = u1.points.iter().map(|p| (p.energy - p.r as f64).abs()).fold(0.0, f64::max);
    let su2 = flux_tube_scan(Theory::Su2 { n_max: 2, unitary: false }, 2.0, &[1, 2, 3], 4).unwrap();
    let sigma = string_tension(&su2.points).unwrap().slope;
    let su2_dev = (sigma - 0.75).abs();
    outcome(u1_dev <= STRONG_TOL && su2_dev <= STRONG_TOL, format!("max |V(R) - R| {u1_dev:.2e}, SU(2) sigma {sigma:.15}"))
}

fn schwinger_filter() -> Outcome {
    let cfg = ModelConfig::new(chain(4).unwrap(), Theory::U1 { ell: 1 })
        .with_matter(dynamic())
        .with_couplings(CouplingSet { eps: 0.6, mass: 0.5, ..CouplingSet::from_g2(1.0) });
    let a = assemble_model(&cfg).unwrap();
    let q = a.spec.default_gauss_targets();
    let keep = |s: &[u8]| a.spec.in_gauss_sector(s, &q);
    let h = a.total();
    let filtered = sector_levels_by_filter(&h, keep, CLUSTER_TOL).unwrap();
    let projected = diagonalize(&project_to_sector(&h, keep).unwrap(), SolverMode::DenseFull).unwrap().values;
    let dev = if filtered.len() == projected.len() {
        filtered.iter().zip(&projected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    outcome(dev <= FILTER_TOL, format!("{} levels, max deviation {dev:.2e}", projected.len()))
}

/// Images and wall time of assembling `H_int` on a fixed sample of states.
fn chain_assembly(links: usize, samples: usize) -> (f64, f64) {
    let cfg = ModelConfig::new(chain(links + 1).unwrap(), Theory::U1 { ell: 1 })
        .with_matter(dynamic())
        .with_couplings(CouplingSet { eps: 1.0, ..CouplingSet::default() });
    let spec = ModelSpec::new(&cfg).unwrap();
    let modes = spec.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(links as u64);
    let states: Vec<Vec<u8>> = (0..samples).map(|_| modes.iter().map(|m| rng.gen_range(0..=m.cap)).collect()).collect();
    let species = spec.default_species();
    let mut out = Vec::new();
    let mut images = 0usize;
    let best = (0..5)
        .map(|_| {
            let clock = Instant::now();
            images = 0;
            for s in &states {
                out.clear();
                spec.interaction_action(&species, 1.0, s, &mut out);
                images += out.len();
            }
            clock.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min);
    (images as f64 / samples as f64, best / samples as f64)
}

fn performance() -> Outcome {
    let clock = Instant::now();
    let cfg = ModelConfig::new(single_plaquette(), Theory::U1 { ell: 2 })
        .with_matter(auxiliary(AuxFill::Pure))
        .with_couplings(CouplingSet::loop_method(EPS, LAMBDA, BETA));
    let a = assemble_model(&cfg).unwrap();
    let dim = a.basis.dim();
    let levels = diagonalize(&a.total(), SolverMode::DenseFull).unwrap().values.len();
    let t = clock.elapsed();

    let rows: Vec<(f64, f64, f64)> = (2..=10)
        .map(|l| {
            let (img, secs) = chain_assembly(l, 4000);
            (l as f64, img, secs)
        })
        .collect();
    // images per state through the origin
    let slope = rows.iter().map(|r| r.0 * r.1).sum::<f64>() / rows.iter().map(|r| r.0 * r.0).sum::<f64>();
    let deviation = rows.iter().map(|r| (r.1 - slope * r.0).abs() / (slope * r.0)).fold(0.0, f64::max);
    let time_fit = fit_power(&rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>()).unwrap();
    outcome(
        t <= ASSEMBLY_BUDGET
            && levels == dim
            && deviation <= LINEAR_DEVIATION
            && (TIME_EXPONENT.0..=TIME_EXPONENT.1).contains(&time_fit.exponent),
        format!(
            "U(1) l=2 plaquette dim {dim} assembled and diagonalized in {:.2}s; chains 2..=10 links: {slope:.3} images/state/link (max deviation {deviation:.3}), time exponent {:.2}",
            t.as_secs_f64(),
            time_fit.exponent
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gauge invariance", gauge_invariance),
        ("link algebra", algebra),
        ("loop coefficients", coefficients),
        ("odd-order cancellation", odd_orders),
        ("exact vs effective scaling", scaling),
        ("x-ell sweep", sweep_surface),
        ("strong coupling", strong_coupling),
        ("schwinger sector filter", schwinger_filter),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += !o.pass as usize;
        println!("acceptance {} {name}: {} {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
