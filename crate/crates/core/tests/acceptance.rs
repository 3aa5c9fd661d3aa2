//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are still evaluated and printed as
//! FAIL; the process fails if any other criterion fails or if a listed one
//! starts passing.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use husimi_phase::damping::{apply_loss, phase_decay_curve, phase_single_damped_closed, DampingParams};
use husimi_phase::fock_oracle::{
    kraus_damp, phase_numeric_values, phase_two_numeric, prepare, q_numeric_pure, FockDensity, FockEnsemble,
    FockState, DEFAULT_CUTOFF_SINGLE, DEFAULT_CUTOFF_TWO,
};
use husimi_phase::husimi::{q_repr, QFormRepr};
use husimi_phase::phasedist::{
    phase_single_closed, phase_single_grid, phase_two_grid, phase_two_sweep, phase_two_tmsv_closed, theta_grid,
    width_about, ClosedForm, SinglePhase, TwoPhase,
};
use husimi_phase::states::{NgOp, Preset, StateSpec};
use husimi_phase::Result;
use num_complex::Complex64 as C64;

const LAMBDAS: [f64; 4] = [0.0, 0.3, 0.6, 0.9];
const TAUS: [f64; 3] = [0.8, 0.9, 1.0];
const ORDERS: [(u32, u32); 7] = [(0, 0), (0, 1), (1, 0), (0, 2), (2, 0), (1, 1), (2, 2)];
/// Per-mode `(k, l)` pairs; a `(0, 0)` second mode is left untouched (τ = 1).
const PAIRS: [((u32, u32), (u32, u32)); 10] = [
    ((0, 0), (0, 0)),
    ((0, 1), (0, 0)),
    ((1, 0), (0, 0)),
    ((0, 1), (0, 1)),
    ((1, 0), (1, 0)),
    ((0, 2), (0, 2)),
    ((2, 0), (2, 0)),
    ((1, 1), (1, 1)),
    ((0, 2), (2, 0)),
    ((1, 1), (0, 1)),
];
const DAMPED_GT: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0];

const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    5,
    "the printed damped forms coincide with the loss pipeline at transmission 2η/(1+η), not η (kernel width taken in quadrature instead of amplitude units); the pipeline is confirmed against the Kraus oracle",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn single(lambda: f64, k: u32, l: u32, tau: f64) -> Result<StateSpec> {
    StateSpec::single(lambda, NgOp::new(k, l, tau)?)
}

fn two(lambda: f64, a: (u32, u32), b: (u32, u32), tau: f64) -> Result<StateSpec> {
    let t2 = if b == (0, 0) { 1.0 } else { tau };
    let t1 = if a == (0, 0) { 1.0 } else { tau };
    StateSpec::two(lambda, NgOp::new(a.0, a.1, t1)?, NgOp::new(b.0, b.1, t2)?)
}

fn subtracts_from_vacuum(lambda: f64, ops: &[(u32, u32)]) -> bool {
    lambda == 0.0 && ops.iter().any(|&(k, l)| l > k)
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn c1_ssv_closed() -> Result<Outcome> {
    let start = Instant::now();
    let thetas = theta_grid(2001)?;
    let mut worst: f64 = 0.0;
    for lambda in LAMBDAS {
        let k = SinglePhase::new(&q_repr(&single(lambda, 0, 0, 1.0)?)?)?;
        for &t in &thetas {
            worst = worst.max(rel(k.at(t)?, phase_single_closed(ClosedForm::SqueezedVacuum, lambda, 1.0, t)));
        }
    }
    let el = start.elapsed();
    Ok(Outcome {
        pass: worst < 1e-10 && within(el, 1.0),
        detail: format!("max rel err {worst:.2e} (< 1e-10), {:.3} s (< 1 s)", el.as_secs_f64()),
    })
}

fn c2_one_photon_closed() -> Result<Outcome> {
    let start = Instant::now();
    let thetas = theta_grid(2001)?;
    let (mut worst, mut coincide): (f64, f64) = (0.0, 0.0);
    for lambda in LAMBDAS {
        for tau in TAUS {
            let pa = SinglePhase::new(&q_repr(&single(lambda, 1, 0, tau)?)?)?;
            let ps = if lambda > 0.0 { Some(SinglePhase::new(&q_repr(&single(lambda, 0, 1, tau)?)?)?) } else { None };
            for &t in &thetas {
                let closed = phase_single_closed(ClosedForm::OnePhoton, lambda, tau, t);
                let a = pa.at(t)?;
                worst = worst.max(rel(a, closed));
                if let Some(ps) = &ps {
                    let s = ps.at(t)?;
                    worst = worst.max(rel(s, closed));
                    coincide = coincide.max(rel(s, a));
                }
            }
        }
    }
    let el = start.elapsed();
    Ok(Outcome {
        pass: worst < 1e-10 && coincide < 1e-10 && within(el, 1.0),
        detail: format!(
            "max rel err {worst:.2e}, PS vs PA {coincide:.2e} (< 1e-10), {:.3} s (< 1 s); λ=0 has no subtraction event",
            el.as_secs_f64()
        ),
    })
}

fn c3_tmsv_closed() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 0.5, 0.9] {
        let spec = StateSpec::two(lambda, NgOp::identity(), NgOp::identity())?;
        let k = TwoPhase::new(&q_repr(&spec)?)?;
        for tp in theta_grid(201)? {
            worst = worst.max(rel(k.at(tp / 2.0, tp / 2.0)?, phase_two_tmsv_closed(lambda, tp / 2.0, tp / 2.0)));
        }
    }
    let el = start.elapsed();
    Ok(Outcome {
        pass: worst < 1e-6 && within(el, 30.0),
        detail: format!("max rel err {worst:.2e} (< 1e-6), {:.2} s (< 30 s)", el.as_secs_f64()),
    })
}

fn c4_oracle() -> Result<Outcome> {
    let start = Instant::now();
    let (mut q1, mut p1, mut q2, mut p2): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut cases = 0;
    let points = [[1.0, 0.0], [0.3, -0.8], [-1.5, 1.1], [0.0, 2.5]];
    let thetas = [0.0, 0.4, PI / 2.0, -2.2];
    for lambda in LAMBDAS {
        for tau in TAUS {
            for (k, l) in ORDERS {
                if subtracts_from_vacuum(lambda, &[(k, l)]) {
                    continue;
                }
                let spec = single(lambda, k, l, tau)?;
                let repr = q_repr(&spec)?;
                let state = prepare(&spec, DEFAULT_CUTOFF_SINGLE)?.state;
                for xi in points {
                    q1 = q1.max(rel(repr.eval(&xi)?, q_numeric_pure(&state, &xi)?));
                }
                let kernel = SinglePhase::new(&repr)?;
                let numeric = phase_numeric_values(&FockEnsemble::pure(&state), &thetas);
                for (&t, &b) in thetas.iter().zip(&numeric) {
                    p1 = p1.max(rel(kernel.at(t)?, b));
                }
                cases += 1;
            }
        }
    }
    let points = [[0.5, 0.0, 0.5, 0.0], [0.3, -0.4, -0.2, 0.9], [-1.0, 0.5, 0.7, 0.2]];
    let angles = [(0.0, 0.0), (0.3, -0.9)];
    for lambda in LAMBDAS {
        for tau in TAUS {
            for (a, b) in PAIRS {
                if subtracts_from_vacuum(lambda, &[a, b]) {
                    continue;
                }
                let spec = two(lambda, a, b, tau)?;
                let repr = q_repr(&spec)?;
                let state = prepare(&spec, DEFAULT_CUTOFF_TWO)?.state;
                for xi in points {
                    q2 = q2.max(rel(repr.eval(&xi)?, q_numeric_pure(&state, &xi)?));
                }
                let kernel = TwoPhase::new(&repr)?;
                for (t1, t2) in angles {
                    p2 = p2.max(rel(kernel.at(t1, t2)?, phase_two_numeric(&state, t1, t2)?));
                }
                cases += 1;
            }
        }
    }
    let el = start.elapsed();
    Ok(Outcome {
        pass: q1.max(p1) < 1e-6 && q2.max(p2) < 1e-5 && within(el, 300.0),
        detail: format!(
            "{cases} specs; single Q {q1:.2e} P {p1:.2e} (< 1e-6), two-mode Q {q2:.2e} P {p2:.2e} (< 1e-5), {:.1} s (< 300 s)",
            el.as_secs_f64()
        ),
    })
}

fn c5_damped_closed() -> Result<Outcome> {
    let thetas = theta_grid(201)?;
    let cases = [
        (ClosedForm::SqueezedVacuum, single(0.9, 0, 0, 1.0)?, 1.0),
        (ClosedForm::OnePhoton, single(0.9, 0, 1, 0.9)?, 0.9),
        (ClosedForm::OnePhoton, single(0.9, 1, 0, 0.9)?, 0.9),
    ];
    let mut per_gt = Vec::new();
    let mut shifted_worst: f64 = 0.0;
    for gt in DAMPED_GT {
        let eta = (-gt).exp();
        let mut worst: f64 = 0.0;
        for (variant, spec, tau) in &cases {
            let repr = q_repr(spec)?;
            let pipeline = SinglePhase::new(&apply_loss(&repr, &[eta])?)?;
            let shifted = SinglePhase::new(&apply_loss(&repr, &[2.0 * eta / (1.0 + eta)])?)?;
            for &t in &thetas {
                let printed = phase_single_damped_closed(*variant, 0.9, *tau, eta, t);
                worst = worst.max(rel(pipeline.at(t)?, printed));
                shifted_worst = shifted_worst.max(rel(shifted.at(t)?, printed));
            }
        }
        per_gt.push((gt, worst));
    }
    let mut reduction: f64 = 0.0;
    for lambda in LAMBDAS {
        for tau in TAUS {
            for &t in &thetas {
                for v in [ClosedForm::SqueezedVacuum, ClosedForm::OnePhoton] {
                    reduction = reduction.max(rel(
                        phase_single_damped_closed(v, lambda, tau, 1.0, t),
                        phase_single_closed(v, lambda, tau, t),
                    ));
                }
            }
        }
    }
    let pass = per_gt.iter().all(|&(_, e)| e < 1e-9) && reduction < 1e-12;
    let listing: Vec<String> = per_gt.iter().map(|(g, e)| format!("γt={g}: {e:.2e}")).collect();
    Ok(Outcome {
        pass,
        detail: format!(
            "pipeline vs printed {} (< 1e-9); η=1 reduction {reduction:.2e} (< 1e-12); printed vs pipeline at 2η/(1+η) {shifted_worst:.2e}",
            listing.join(", ")
        ),
    })
}

fn c6_normalization() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut record = |r: f64| {
        worst = worst.max(r);
        count += 1;
    };
    for lambda in LAMBDAS {
        for tau in TAUS {
            for (k, l) in ORDERS {
                if subtracts_from_vacuum(lambda, &[(k, l)]) {
                    continue;
                }
                let repr = q_repr(&single(lambda, k, l, tau)?)?;
                for gt in [0.0f64, 0.5, 1.0, 3.0] {
                    let damped = apply_loss(&repr, &[(-gt).exp()])?;
                    record(phase_single_grid(&damped, 2001)?.norm_residual);
                }
            }
            for (a, b) in PAIRS {
                if subtracts_from_vacuum(lambda, &[a, b]) {
                    continue;
                }
                let repr = q_repr(&two(lambda, a, b, tau)?)?;
                for gt in [0.0f64, 1.0] {
                    let e = (-gt).exp();
                    record(phase_two_sweep(&apply_loss(&repr, &[e, e])?, 201)?.norm_residual);
                }
            }
        }
    }
    // Full (θ₁, θ₂) grids for a few two-mode states.
    for (a, b) in [((0, 0), (0, 0)), ((0, 1), (0, 1)), ((1, 1), (0, 1))] {
        let repr = q_repr(&two(0.9, a, b, 0.9)?)?;
        record(phase_two_grid(&repr, 61)?.norm_residual);
        record(phase_two_grid(&apply_loss(&repr, &[0.5, 0.8])?, 61)?.norm_residual);
    }
    Ok(Outcome {
        pass: worst < 1e-6,
        detail: format!("{count} distributions, max |∫P − 1| = {worst:.2e} (< 1e-6)"),
    })
}

fn peak_at(repr: &QFormRepr, theta: f64) -> Result<f64> {
    SinglePhase::new(repr)?.at(theta)
}

fn c7_trends() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };

    // Single-mode distributions at λ = τ = 0.9.
    let fig2 = [("SSV", (0, 0)), ("1-PS", (0, 1)), ("2-PS", (0, 2)), ("1-PA", (1, 0)), ("2-PA", (2, 0))];
    let mut peaks = Vec::new();
    for (name, (k, l)) in fig2 {
        let tau = if (k, l) == (0, 0) { 1.0 } else { 0.9 };
        let repr = q_repr(&single(0.9, k, l, tau)?)?;
        let d = phase_single_grid(&repr, 2001)?;
        check((d.peak_theta - PI / 2.0).abs() < 1e-12, format!("{name} peak at {:.4}π", d.peak_theta / PI));
        check(
            rel(peak_at(&repr, -PI / 2.0)?, peak_at(&repr, PI / 2.0)?) < 1e-12,
            format!("{name} not symmetric under θ → −θ"),
        );
        peaks.push(peak_at(&repr, PI / 2.0)?);
    }
    check(peaks[2] > peaks[1] && peaks[1] > peaks[0], format!("peak ordering 2-PS {:.4} > 1-PS {:.4} > SSV {:.4}", peaks[2], peaks[1], peaks[0]));
    let width = |spec: StateSpec| -> Result<f64> {
        let k = SinglePhase::new(&q_repr(&spec)?)?;
        width_about(|t| k.at(t), PI / 2.0)
    };
    let (w_pc, w_ssv) = (width(single(0.9, 1, 1, 0.9)?)?, width(single(0.9, 0, 0, 1.0)?)?);
    check(w_pc > w_ssv, format!("width 1-PC {w_pc:.4} vs SSV {w_ssv:.4}"));

    // Two-mode peaks at θ₊ = 0.
    let mut two_peak = |p: Preset| -> Result<f64> {
        let repr = q_repr(&p.spec(0.9, 0.9, 0.9)?)?;
        let d = phase_two_sweep(&repr, 201)?;
        check(d.peak_theta.abs() < 1e-12, format!("{p} peak at θ₊ = {:.4}π", d.peak_theta / PI));
        TwoPhase::new(&repr)?.at(0.0, 0.0)
    };
    let mut heights = std::collections::BTreeMap::new();
    for p in ["tmsv", "asym-ps", "asym-pa", "sym-ps", "sym-pa", "asym-ps:2", "sym-pa:2"] {
        let preset: Preset = p.parse()?;
        heights.insert(p, two_peak(preset)?);
    }
    check(heights["sym-ps"] > heights["asym-ps"], format!("sym-ps {:.5} vs asym-ps {:.5}", heights["sym-ps"], heights["asym-ps"]));
    check(heights["sym-pa"] > heights["asym-pa"], format!("sym-pa {:.5} vs asym-pa {:.5}", heights["sym-pa"], heights["asym-pa"]));

    // Decay curves.
    let times: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    let late = [0.0, 60.0, f64::INFINITY];
    for (name, (k, l)) in fig2.iter().chain([("1-PC", (1, 1))].iter()) {
        let tau = if (*k, *l) == (0, 0) { 1.0 } else { 0.9 };
        let repr = q_repr(&single(0.9, *k, *l, tau)?)?;
        let c = phase_decay_curve(&repr, &[1.0], &times, &[PI / 2.0])?;
        check(c.windows(2).all(|w| w[1].value < w[0].value), format!("{name} decay not monotone"));
        let tail = phase_decay_curve(&repr, &[1.0], &late, &[PI / 2.0])?;
        check((tail[2].value - 1.0 / (2.0 * PI)).abs() < 1e-12, format!("{name} limit {}", tail[2].value));
        check((tail[1].value - 1.0 / (2.0 * PI)).abs() < 1e-10, format!("{name} at γt=60: {}", tail[1].value));
    }
    for p in ["tmsv", "asym-ps", "asym-pa", "sym-ps", "sym-pa", "sym-ps:2"] {
        let preset: Preset = p.parse()?;
        let repr = q_repr(&preset.spec(0.9, 0.9, 0.9)?)?;
        let c = phase_decay_curve(&repr, &[1.0, 1.0], &times, &[0.0, 0.0])?;
        check(c.windows(2).all(|w| w[1].value < w[0].value), format!("{p} decay not monotone"));
        let tail = phase_decay_curve(&repr, &[1.0, 1.0], &late, &[0.0, 0.0])?;
        check((tail[2].value - 1.0 / (4.0 * PI * PI)).abs() < 1e-12, format!("{p} limit {}", tail[2].value));
        check((tail[1].value - 1.0 / (4.0 * PI * PI)).abs() < 1e-10, format!("{p} at γt=60: {}", tail[1].value));
    }

    // Width trends.
    for (name, (k, l)) in [("1-PS", (0, 1)), ("1-PA", (1, 0))] {
        let lam: Vec<f64> = (0..=17).map(|i| 0.1 + 0.05 * i as f64).collect();
        let w_l = lam.iter().map(|&x| width(single(x, k, l, 0.9)?)).collect::<Result<Vec<_>>>()?;
        check(w_l.windows(2).all(|w| w[1] < w[0]), format!("{name} width not decreasing in λ: {w_l:?}"));
        let taus: Vec<f64> = (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect();
        let w_t = taus.iter().map(|&x| width(single(0.9, k, l, x)?)).collect::<Result<Vec<_>>>()?;
        check(w_t.windows(2).all(|w| w[1] < w[0]), format!("{name} width not decreasing in τ: {w_t:?}"));
    }

    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "peaks 2-PS {:.4} > 1-PS {:.4} > SSV {:.4}; width 1-PC {w_pc:.4} > SSV {w_ssv:.4}; two-mode peaks at θ₊=0; decays monotone with vacuum limits",
                peaks[2], peaks[1], peaks[0]
            )
        } else {
            failures.join("; ")
        },
    })
}

fn c8_coherent_damping() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        for gt in [0.1, 1.0, 5.0] {
            let start = FockDensity::from_pure(&FockState::coherent(C64::new(alpha, 0.0), 80));
            let d = DampingParams::new(vec![1.0], gt)?;
            let target = FockState::coherent(C64::new(alpha * d.eta(0).sqrt(), 0.0), 80);
            worst = worst.max(1.0 - kraus_damp(&start, 1.0, gt)?.fidelity_with(&target));
        }
    }
    Ok(Outcome {
        pass: worst < 1e-10,
        detail: format!("max infidelity {worst:.2e} (< 1e-10)"),
    })
}

fn main() {
    let criteria: [(u32, &str, fn() -> Result<Outcome>); 8] = [
        (1, "SSV phase closed form", c1_ssv_closed),
        (2, "1-PS/1-PA phase closed form", c2_one_photon_closed),
        (3, "TMSV phase closed form", c3_tmsv_closed),
        (4, "oracle equivalence", c4_oracle),
        (5, "damped closed forms", c5_damped_closed),
        (6, "normalization", c6_normalization),
        (7, "qualitative trends", c7_trends),
        (8, "coherent-state damping law", c8_coherent_damping),
    ];
    let mut unexpected = 0;
    for (id, title, f) in criteria {
        let outcome = f().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id);
        println!("criterion {id} {}: {title}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        match (outcome.pass, known) {
            (false, Some((_, why))) => println!("  known unattainable: {why}"),
            (true, Some(_)) => {
                println!("  listed as unattainable but passed; update the list");
                unexpected += 1;
            }
            (false, None) => unexpected += 1,
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected acceptance result(s)");
        std::process::exit(1);
    }
}
