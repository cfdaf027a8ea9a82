//! Cross-checks of the solvers against the independent references.

use fbfep_core::instances::{constrained_quadratic_saddle, planar_strongly_monotone, saddle_oracle};
use fbfep_core::minimax::{alg2_run, build_minimax_problem, QuadraticSaddle};
use fbfep_core::ops::{moreau_conjugate_prox, op_norm_estimate, Counted, DenseMatrix, LinearMap, ProxOracle};
use fbfep_core::splitting::PenaltyProblem;
use fbfep_core::oracle::prox_optimality_check;
use fbfep_core::rng::{pcg32, uniform_symmetric};
use fbfep_core::splitting::{run, Algorithm, RunOptions};
use fbfep_core::tv::{CrossNormProx, DiskProjection, Gradient2d};
use fbfep_core::vecops::{dist, dot};
use fbfep_core::{validate_schedule, PolySchedule};

use crate::commands::default_schedule;
use crate::error::{CliError, CliResult};

type Check = fn() -> Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = pcg32(seed);
    (0..n).map(|_| uniform_symmetric(&mut rng)).collect()
}

fn gradient_adjoint() -> Result<(), String> {
    let l = Gradient2d::<f64>::new(16, 16);
    for seed in 0..100 {
        let (x, g) = (random(256, seed), random(512, seed + 1000));
        let gap = (dot(&l.apply(&x), &g) - dot(&x, &l.adjoint(&g))).abs();
        ensure(gap <= 1e-10, || format!("<Lx, g> - <x, L*g> = {gap:e}"))?;
    }
    Ok(())
}

fn gradient_norm() -> Result<(), String> {
    let s = op_norm_estimate(&Gradient2d::<f64>::new(64, 64), 1000, 1e-9).map_err(|e| e.to_string())?;
    ensure(s < 8f64.sqrt(), || format!("||L|| estimate {s}"))
}

fn moreau() -> Result<(), String> {
    for seed in 0..100 {
        let x = random(8, seed).iter().map(|v| 3.0 * v).collect::<Vec<_>>();
        let gamma = 0.5 + (seed as f64) / 50.0;
        let p = CrossNormProx { pixels: 4 }.prox(gamma, &x);
        // x = prox_{γ g}(x) + γ proj(x / γ) with g* the indicator of the unit disks
        let scaled: Vec<f64> = x.iter().map(|v| v / gamma).collect();
        let q = DiskProjection { pixels: 4 }.prox(gamma, &scaled);
        let back: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + gamma * b).collect();
        ensure(dist(&back, &x) <= 1e-12, || format!("Moreau decomposition misses x by {:e}", dist(&back, &x)))?;
        let disks = moreau_conjugate_prox(&DiskProjection { pixels: 4 }, gamma, &x).map_err(|e| e.to_string())?;
        ensure(dist(&disks, &p) <= 1e-12, || "conjugate route disagrees with the group shrinkage".into())?;
    }
    Ok(())
}

fn prox_optimality() -> Result<(), String> {
    let cross = |z: &[f64]| (0..4).map(|k| z[k].hypot(z[k + 4])).sum::<f64>();
    for seed in 0..20 {
        let x = random(8, seed + 7);
        let p = CrossNormProx { pixels: 4 }.prox(0.4, &x);
        ensure(prox_optimality_check(&cross, &x, &p, 0.4, 50).map_err(|e| e.to_string())?, || {
            format!("shrinkage is not a minimizer at seed {seed}")
        })?;
    }
    Ok(())
}

fn evaluation_counts() -> Result<(), String> {
    let inst = planar_strongly_monotone::<f64>();
    let p0 = inst.problem().map_err(|e| e.to_string())?;
    let (d, b) = (Counted::new(&p0.single), Counted::new(&p0.penalty));
    let p = PenaltyProblem::new(&p0.resolvent, &d, &b).map_err(|e| e.to_string())?;
    let s = default_schedule(inst.mu(), inst.eta()).map_err(|e| e.to_string())?;
    for (alg, expect) in [(Algorithm::FbfEp, 1001), (Algorithm::Fbf, 2000)] {
        b.reset();
        d.reset();
        run(&p, &s, &[0.0, 0.0], None, &RunOptions::new(1000, alg)).map_err(|e| e.error.to_string())?;
        ensure(b.count() == expect && d.count() == expect, || {
            format!("{}: {} B and {} D calls, expected {expect}", alg.name(), b.count(), d.count())
        })?;
    }
    Ok(())
}

fn inclusion_reference() -> Result<(), String> {
    let inst = planar_strongly_monotone::<f64>();
    let u = inst.oracle_solution().map_err(|e| e.to_string())?;
    let p = inst.problem().map_err(|e| e.to_string())?;
    let s = default_schedule(inst.mu(), inst.eta()).map_err(|e| e.to_string())?;
    let rec = run(&p, &s, &[0.0, 0.0], None, &RunOptions::new(5000, Algorithm::FbfEp)).map_err(|e| e.error.to_string())?;
    let gap = dist(&rec.x, &u);
    ensure(gap <= 1e-4, || format!("distance to reference {gap:e}"))
}

fn minimax_reference() -> Result<(), String> {
    let inst = constrained_quadratic_saddle::<f64>();
    let rows = |r: &[[f64; 2]; 2]| DenseMatrix::from_rows(&[r[0].to_vec(), r[1].to_vec()]).expect("2x2");
    let f = QuadraticSaddle::new(
        rows(&[[1.0, -1.0], [-1.0, 1.0]]),
        rows(&[[1.0, 1.0], [-1.0, -1.0]]),
        rows(&[[1.0, 1.0], [1.0, 1.0]]),
        vec![0.0; 2],
        vec![0.0; 2],
    )
    .map_err(|e| e.to_string())?;
    let u = saddle_oracle(&f, &inst.k1, &inst.b1, &inst.k2, &inst.b2).map_err(|e| e.to_string())?;
    let p = build_minimax_problem(&inst).map_err(|e| e.to_string())?;
    let s = default_schedule(p.mu(), p.eta()).map_err(|e| e.to_string())?;
    let rec = alg2_run(&inst, &s, &[0.0; 2], &[0.0; 2], &RunOptions::new(2000, Algorithm::FbfEp)).map_err(|e| e.error.to_string())?;
    let gap = dist(&rec.x, &u);
    ensure(gap <= 1e-4, || format!("distance to KKT point {gap:e}"))
}

fn schedule_validator() -> Result<(), String> {
    let r = validate_schedule(&PolySchedule::inpainting_fbf_ep(), 1.0, f64::INFINITY, 1000).map_err(|e| e.to_string())?;
    let expect = 0.9 * 2f64.powf(-0.75);
    ensure((r.limsup_estimate - expect).abs() <= 1e-12, || format!("limsup {}", r.limsup_estimate))?;
    ensure(!r.condition_fbf_ep && r.condition_fbf && r.in_l2_not_l1, || format!("{r:?}"))
}

pub const CHECKS: [(&str, Check); 8] = [
    ("gradient adjoint identity", gradient_adjoint),
    ("gradient norm below sqrt 8", gradient_norm),
    ("Moreau decomposition", moreau),
    ("prox optimality", prox_optimality),
    ("evaluation counts", evaluation_counts),
    ("inclusion vs reference solve", inclusion_reference),
    ("minimax vs KKT solve", minimax_reference),
    ("schedule validator", schedule_validator),
];

pub fn run_checks() -> CliResult<()> {
    let mut failed = 0;
    for (name, check) in CHECKS {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::SelfTest(failed))
    }
}
